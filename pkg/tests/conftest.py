import itertools
import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from dgswitch.core import Instance

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_instance(rng: np.random.Generator, n: int, integer: bool = False, high: float = 100.0) -> Instance:
    if integer:
        return Instance(rng.integers(0, int(high), size=(n, n)).astype(float))
    return Instance(rng.uniform(0.0, high, size=(n, n)))


def enumerate_optimum(inst: Instance) -> float:
    """Independent oracle: plain-Python max over all permutations."""
    a = inst.benefits.tolist()
    n = inst.n
    return max(math.fsum(a[p[j]][j] for j in range(n)) for p in itertools.permutations(range(n)))


@st.composite
def instances(draw, min_n: int = 1, max_n: int = 6, integer: bool = False):
    n = draw(st.integers(min_n, max_n))
    if integer:
        vals = st.integers(-50, 50).map(float)
    else:
        vals = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
    flat = draw(st.lists(vals, min_size=n * n, max_size=n * n))
    return Instance(np.array(flat, dtype=float).reshape(n, n))


@st.composite
def instance_and_perm(draw, min_n: int = 1, max_n: int = 6, integer: bool = False):
    inst = draw(instances(min_n, max_n, integer))
    perm = draw(st.permutations(range(inst.n)))
    return inst, np.array(perm, dtype=np.int64)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
