import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_convex_polygon(rng, n_pts=8, scale=1.0, symmetric=False, n_grid=720):
    """Random convex polygon as a StarBody (origin interior by construction)."""
    from entropia.convex_body import StarBody

    pts = rng.normal(size=(n_pts, 2)) * scale
    pts += 0.1 * np.sign(pts)  # push away from origin a little
    if symmetric:
        pts = np.vstack([pts, -pts])
    else:
        # recentre on the centroid so the origin is interior
        pts = pts - pts.mean(axis=0)
    return StarBody.from_points(pts, n=n_grid)
