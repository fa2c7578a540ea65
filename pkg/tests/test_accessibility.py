import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from embedlab.accessibility import (
    accessible_with_memory,
    majorisation_region,
    majorises,
    memory_region_extent,
    partial_swap,
    partial_swap_generator,
    qubit_memory_classical_interval,
    qubit_memoryless_classical_interval,
    uniform_fixed_point_path,
)
from embedlab.errors import InvalidInput, NotAccessible

from .conftest import random_prob

E = math.e
G = (E / (1 + E), 1 / (1 + E))


def majorises_oracle(p, q):
    """Doubly-stochastic characterisation: q lies in the convex hull of permutations of p
    iff sum of the k largest entries dominate, checked through all k-subsets."""
    import itertools

    d = len(p)
    for k in range(1, d):
        best_p = max(sum(c) for c in itertools.combinations(p, k))
        best_q = max(sum(c) for c in itertools.combinations(q, k))
        if best_p < best_q - 1e-12:
            return False
    return True


def test_lp_identity_and_qubit_endpoint():
    p = np.array([0.9, 0.1])
    assert accessible_with_memory(p, p, G)
    end = 1 - 0.9 / E
    assert end == pytest.approx(0.66891, abs=1e-5)
    assert accessible_with_memory(p, [end, 1 - end], G)
    assert not accessible_with_memory(p, [0.66, 0.34], G)


def test_lp_errors():
    with pytest.raises(InvalidInput):
        accessible_with_memory([0.5, 0.5], [1, 0, 0], [0.5, 0.5])
    with pytest.raises(InvalidInput):
        accessible_with_memory([0.5, 0.5], [0.5, 0.5], [1.0, 0.0])


def test_majorisation_examples():
    assert majorises([0.5, 0.3, 0.2], [0.4, 0.35, 0.25])
    assert not majorises([0.5, 0.3, 0.2], [1, 0, 0])
    assert majorises([0.7, 0.2, 0.1], np.ones(3) / 3)


@given(st.integers(2, 5), st.integers(0, 2**31))
def test_majorisation_matches_subset_oracle(d, seed):
    rng = np.random.default_rng(seed)
    p, q = random_prob(rng, d), random_prob(rng, d)
    assert majorises(p, q) == majorises_oracle(p, q)


@given(st.integers(2, 5), st.integers(0, 2**31))
def test_lp_with_uniform_fixed_point_is_majorisation(d, seed):
    rng = np.random.default_rng(seed)
    p, q = random_prob(rng, d) ** 2, random_prob(rng, d)
    p /= p.sum()
    assert accessible_with_memory(p, q, np.ones(d) / d) == majorises(p, q)


def test_qubit_intervals_examples():
    g = E / (1 + E)
    assert qubit_memoryless_classical_interval(0.9, 1.0) == pytest.approx((0.731059, 0.9), abs=1e-6)
    assert qubit_memoryless_classical_interval(0.3, 0.0) == (0.3, 0.5)
    lo, hi = qubit_memoryless_classical_interval(g, 1.0)
    assert lo == hi
    assert qubit_memory_classical_interval(0.9, 1.0) == pytest.approx((0.66891, 0.9), abs=1e-5)
    assert qubit_memory_classical_interval(g, 1.0) == pytest.approx((g, g), abs=1e-15)
    assert qubit_memory_classical_interval(0.3, 0.0) == pytest.approx((0.3, 0.7))
    assert qubit_memory_classical_interval(0.8, 0.0) == pytest.approx((0.2, 0.8))
    with pytest.raises(InvalidInput):
        qubit_memory_classical_interval(1.2, 1.0)


def _lp_boundary(p, betaE, upper):
    """Bisection on LP feasibility for the ground population reachable from p."""
    gamma = np.array([1, math.exp(-betaE)]) / (1 + math.exp(-betaE))
    inside, outside = p, (1.0 if upper else 0.0)
    for _ in range(40):
        mid = 0.5 * (inside + outside)
        if accessible_with_memory([p, 1 - p], [mid, 1 - mid], gamma):
            inside = mid
        else:
            outside = mid
    return inside


@pytest.mark.parametrize("p,betaE", [(0.1, 1.0), (0.5, 1.0), (0.9, 1.0), (0.3, 2.5), (0.95, 0.4)])
def test_qubit_memory_interval_matches_lp_bisection(p, betaE):
    lo, hi = qubit_memory_classical_interval(p, betaE)
    assert _lp_boundary(p, betaE, upper=True) == pytest.approx(hi, abs=1e-6)
    assert _lp_boundary(p, betaE, upper=False) == pytest.approx(lo, abs=1e-6)


def test_region_extent_matches_interval():
    ext = memory_region_extent([0.9, 0.1], G)
    assert ext[0] == pytest.approx(qubit_memory_classical_interval(0.9, 1.0), abs=1e-9)


def test_partial_swap_generator():
    L = partial_swap_generator(4, 1, 3)
    assert np.allclose(L @ np.ones(4), 0)
    from embedlab.linalg import expm

    t = 0.8
    assert np.allclose(expm(L, t), partial_swap(4, 1, 3, 1 - math.exp(-t)))


def test_uniform_path_examples():
    s = uniform_fixed_point_path([0.5, 0.3, 0.2], [0.5, 0.3, 0.2])
    assert s.stages == []
    s = uniform_fixed_point_path([0.5, 0.3, 0.2], [0.4, 0.35, 0.25])
    assert len(s.stages) <= 2
    assert np.allclose(s.apply([0.5, 0.3, 0.2]), [0.4, 0.35, 0.25], atol=1e-10)
    with pytest.raises(NotAccessible):
        uniform_fixed_point_path([0.5, 0.3, 0.2], [1, 0, 0])


def test_uniform_path_to_uniform_uses_limit():
    s = uniform_fixed_point_path([1.0, 0.0], [0.5, 0.5])
    assert math.isinf(s.stages[0][2])
    assert np.allclose(s.apply([1.0, 0.0]), [0.5, 0.5], atol=1e-10)


@given(st.integers(2, 6), st.integers(0, 2**31))
def test_uniform_path_constructive(d, seed):
    rng = np.random.default_rng(seed)
    p = random_prob(rng, d)
    # q = D p for a random doubly stochastic D, so p majorises q
    perms = [rng.permutation(d) for _ in range(3)]
    w = random_prob(rng, 3)
    q = sum(wk * p[pk] for wk, pk in zip(w, perms))
    s = uniform_fixed_point_path(p, q)
    assert len(s.stages) <= d - 1
    assert np.abs(s.apply(p) - q).max() <= 1e-10
    for L, _ in s.generators():
        assert np.allclose(L @ np.ones(d), 0)


def test_majorisation_region_description():
    r = majorisation_region([0.2, 0.5, 0.3])
    assert r["sorted_partial_sums"] == pytest.approx([0.5, 0.8, 1.0])
