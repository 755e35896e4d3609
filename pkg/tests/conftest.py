import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)


def seeded_panel_geometries(n, seed=42, z_range=(0.5, 10.0)):
    """Random panels with the receiver inside the footprint (the closed forms
    keep a removable singularity on |x0| = L_x / |y0| = L_y)."""
    gen = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        l_x, l_y = gen.uniform(0.1, 4.0, 2)
        x0 = gen.uniform(-0.9, 0.9) * l_x
        y0 = gen.uniform(-0.9, 0.9) * l_y
        z0 = gen.uniform(*z_range)
        out.append((l_x, l_y, x0, y0, z0))
    return out
