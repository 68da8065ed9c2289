import itertools
import math

import numpy as np
import pytest
from scipy.integrate import trapezoid
from scipy.stats import norm

from conftest import random_simplex
from noisysimplex.errors import DimMismatch, UnsupportedNoiseless
from noisysimplex.geometry import Simplex
from noisysimplex.metrics import (
    kl_noisy_mc,
    l2_uniform,
    tv_noisy_mc,
    tv_uniform,
    vertex_l1,
    vertex_l1_bruteforce,
)
from noisysimplex.sampler import NoisyModel

UNIT = Simplex(np.array([[0.0], [1.0]]))


def interval(a, b):
    return Simplex(np.array([[a], [b]]))


def smoothed_interval(x, a, b, sigma):
    return (norm.cdf((x - a) / sigma) - norm.cdf((x - b) / sigma)) / (b - a)


def test_tv_identical_and_disjoint():
    s = Simplex.standard(2)
    assert tv_uniform(s, s, 10_000).value == 0.0
    assert tv_uniform(s, s.translate([5.0, 5.0]), 10_000).value == 1.0


def test_tv_half_overlapping_intervals():
    e = tv_uniform(UNIT, interval(0.5, 1.5), 100_000, 1)
    assert abs(e.value - 0.5) <= 3 * e.std_error + 1e-12


def test_l2_examples():
    s = Simplex.standard(2)
    assert l2_uniform(s, s, 10_000).value == 0.0
    far = l2_uniform(s, s.translate([5.0, 5.0]), 10_000)
    assert far.value == pytest.approx(math.sqrt(2 / 0.5))
    e = l2_uniform(UNIT, interval(0.5, 1.5), 100_000, 2)
    assert abs(e.value - 1.0) <= 3 * e.std_error


def test_vertex_l1_examples(rng):
    s = random_simplex(rng, 3)
    rev = Simplex(s.vertices[::-1])
    assert vertex_l1(s, rev).cost == pytest.approx(0.0, abs=1e-12)
    b = np.array([0.1, -0.2, 0.3])
    a = vertex_l1(s, s.translate(b))
    assert a.cost == pytest.approx(4 * np.abs(b).sum())
    assert a.permutation == (0, 1, 2, 3)


def test_vertex_l1_matches_bruteforce_and_is_symmetric(rng):
    for K in (1, 2, 3, 4):
        for _ in range(10):
            s1, s2 = random_simplex(rng, K), random_simplex(rng, K)
            assert vertex_l1(s1, s2).cost == vertex_l1_bruteforce(s1, s2).cost
            assert vertex_l1(s1, s2).cost == pytest.approx(vertex_l1(s2, s1).cost, abs=1e-12)


def test_vertex_l1_dimension_mismatch():
    with pytest.raises(DimMismatch):
        vertex_l1(Simplex.standard(2), Simplex.standard(3))


def test_tv_symmetry_and_triangle(rng):
    a, b, c = (random_simplex(rng, 2, 0.5) for _ in range(3))
    ab, ba = tv_uniform(a, b, 50_000, 1), tv_uniform(b, a, 50_000, 2)
    assert abs(ab.value - ba.value) <= 3 * (ab.std_error + ba.std_error) + 1e-12
    ac, bc = tv_uniform(a, c, 50_000, 3), tv_uniform(b, c, 50_000, 4)
    assert ac.value <= ab.value + bc.value + 3 * (ab.std_error + bc.std_error + ac.std_error)


def test_tv_noisy_identical_models():
    m = NoisyModel(Simplex.standard(2), 0.2)
    e = tv_noisy_mc(m, m, 5000, 1000, 3)
    assert e.value == 0.0


def test_tv_noisy_small_sigma_matches_uniform():
    s1 = Simplex.standard(2)
    s2 = s1.translate([0.4, 0.1])
    u = tv_uniform(s1, s2, 100_000, 5)
    e = tv_noisy_mc(NoisyModel(s1, 0.01), NoisyModel(s2, 0.01), 40_000, 4000, 6)
    # the noise itself blurs the boundary by O(sigma * perimeter / area)
    assert abs(e.value - u.value) <= 3 * (e.std_error + u.std_error) + 0.03


def test_tv_noisy_interval_oracle():
    x = np.linspace(-3, 4, 200_001)
    f1 = smoothed_interval(x, 0.0, 1.0, 0.2)
    f2 = smoothed_interval(x, 0.1, 1.1, 0.2)
    oracle = 0.5 * trapezoid(np.abs(f1 - f2), x)
    e = tv_noisy_mc(NoisyModel(UNIT, 0.2), NoisyModel(interval(0.1, 1.1), 0.2), 40_000, 4000, 7)
    assert abs(e.value - oracle) <= 0.01


def test_convolution_contracts_tv(rng):
    s1 = random_simplex(rng, 2, 0.6)
    s2 = s1.translate([0.15, -0.05])
    u = tv_uniform(s1, s2, 100_000, 8)
    e = tv_noisy_mc(NoisyModel(s1, 0.2), NoisyModel(s2, 0.2), 20_000, 2000, 9)
    assert e.value <= u.value + 3 * (e.std_error + u.std_error)


def test_kl_identical_and_noiseless_target():
    m = NoisyModel(Simplex.standard(2), 0.3)
    e = kl_noisy_mc(m, m, 5000, 1000, 1)
    assert abs(e.value) <= 3 * e.std_error + 1e-12
    with pytest.raises(UnsupportedNoiseless):
        kl_noisy_mc(m, NoisyModel(Simplex.standard(2), 0.0), 5000, 1000, 1)


def test_kl_shift_bound_example():
    s = Simplex.standard(3)
    m1, m2 = NoisyModel(s, 1.0), NoisyModel(s.translate([0.1, 0.0, 0.0]), 1.0)
    e = kl_noisy_mc(m1, m2, 20_000, 2000, 2)
    assert e.value <= 0.005 + 3 * e.std_error


def test_kl_interval_oracle():
    x = np.linspace(-3, 4, 200_001)
    f1 = smoothed_interval(x, 0.0, 1.0, 0.2)
    f2 = smoothed_interval(x, 0.2, 1.3, 0.25)
    mask = f1 > 1e-300
    oracle = trapezoid(np.where(mask, f1 * np.log(np.where(mask, f1, 1) / f2), 0.0), x)
    e = kl_noisy_mc(NoisyModel(UNIT, 0.2), NoisyModel(interval(0.2, 1.3), 0.25), 40_000, 4000, 3)
    assert abs(e.value - oracle) <= 0.01
