import numpy as np
import pytest

from reachstl import reach
from reachstl.setalg import Zonotope, sample_zonotope


def make_rng(seed):
    return np.random.default_rng(seed)


def random_zonotope(rng, dim=2, max_gens=6, scale=1.0):
    g = int(rng.integers(1, max_gens + 1))
    return Zonotope(rng.normal(size=dim) * scale,
                    rng.normal(size=(dim, g)) * scale)


def linear_dataset(A, B, noise, n_points, seg_len, rng):
    """Trajectory segments of x+ = Ax + Bu + w with w sampled in `noise`."""
    segs = []
    x = rng.uniform(-2, 2, A.shape[0])
    st, ins = [x], []
    made = 0
    while made < n_points:
        u = rng.uniform(-1, 1, B.shape[1])
        w = sample_zonotope(noise, 1, rng)[0] if noise.order else noise.center
        x = A @ x + B @ u + w
        ins.append(u)
        st.append(x)
        made += 1
        if len(ins) == seg_len:
            segs.append((st, ins))
            x = rng.uniform(-2, 2, A.shape[0])
            st, ins = [x], []
    if ins:
        segs.append((st, ins))
    return reach.TrajectoryDataset(segs)


@pytest.fixture(scope="session")
def rng_session():
    return make_rng(20240817)
