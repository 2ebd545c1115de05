import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from polarsfm.setfn import TabularFunction, bit_matrix

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

# f(empty)=0 and -1 on every nonempty subset of {0, 1}: strictly supermodular
EX1_VALUES = [0.0, -1.0, -1.0, -1.0]
# 0, 1 on singletons, 1.9 on pairs, 2.85 on the full set: not submodular
EX2_VALUES = [0.0, 1.0, 1.0, 1.9, 1.0, 1.9, 1.9, 2.85]


@pytest.fixture
def ex1():
    return TabularFunction(2, EX1_VALUES)


@pytest.fixture
def ex2():
    return TabularFunction(3, EX2_VALUES)


def random_submodular(rng: np.random.Generator, n: int, modular_scale: float = 5.0) -> TabularFunction:
    """Normalized submodular table: concave-of-modular sums plus a cut function plus a modular part."""
    masks = np.arange(1 << n)
    X = bit_matrix(masks, n)
    vals = np.zeros(1 << n)
    for _ in range(3):
        w = rng.uniform(0.0, 3.0, n)
        vals += rng.uniform(0.5, 2.0) * np.sqrt(X @ w)
    W = np.triu(rng.uniform(0.0, 1.0, (n, n)), 1)
    vals += np.einsum("ki,ij,kj->k", X, W, 1 - X) + np.einsum("ki,ij,kj->k", 1 - X, W, X)
    vals += X @ rng.uniform(-modular_scale, modular_scale, n)
    return TabularFunction(n, vals - vals[0])


@st.composite
def tabular_functions(draw, n_min=1, n_max=6, normalized=True):
    n = draw(st.integers(n_min, n_max))
    vals = draw(
        st.lists(st.floats(-10, 10, allow_nan=False, width=32), min_size=1 << n, max_size=1 << n)
    )
    vals = np.array(vals, dtype=float)
    if normalized:
        vals[0] = 0.0
    return TabularFunction(n, vals)


@st.composite
def submodular_functions(draw, n_min=1, n_max=6):
    n = draw(st.integers(n_min, n_max))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_submodular(np.random.default_rng(seed), n)


@st.composite
def unit_points(draw, n):
    return np.array(draw(st.lists(st.floats(0, 1, allow_nan=False), min_size=n, max_size=n)))
