import math

import numpy as np
import pytest

from noisysimplex.errors import PackingBudgetExceeded
from noisysimplex.geometry import Simplex
from noisysimplex.metrics import kl_noisy_mc, tv_uniform
from noisysimplex.minimax import (
    AssouadCodebook,
    assouad_family,
    empirical_minimax,
    fano_family,
    lecam_pair,
    translate_tv_exact,
)
from noisysimplex.sampler import NoisyModel
from noisysimplex.seeding import spa_vertices


def hull_learner(data):
    return Simplex(data.points[spa_vertices(data.points)])


def test_exact_translate_tv():
    assert translate_tv_exact([0.0, 0.0], [0.0, 0.0]) == 0.0
    assert translate_tv_exact([0.0], [0.3]) == pytest.approx(0.3)
    assert translate_tv_exact([0.0, 0.0], [2.0, 0.0]) == 1.0
    s = Simplex.standard(2)
    e = tv_uniform(s, s.translate([0.1, -0.05]), 200_000, 1)
    assert abs(e.value - translate_tv_exact([0, 0], [0.1, -0.05])) <= 3 * e.std_error


@pytest.mark.parametrize("K", [1, 2, 3])
def test_two_translates(K):
    fam = fano_family(K, 0.2, 2, seed=K)
    t = np.array(fam.info["shifts"])
    assert np.linalg.norm(t[0] - t[1]) >= 0.2 / (2 * K)


def test_fano_geometry_and_tv():
    K, zeta = 2, 0.3
    fam = fano_family(K, zeta, 8, seed=0)
    t = np.array(fam.info["shifts"])
    for i in range(8):
        assert np.linalg.norm(t[i]) <= zeta / K + 1e-12
        for j in range(i + 1, 8):
            d = np.linalg.norm(t[i] - t[j])
            assert zeta / (2 * K) <= d <= 2 * zeta / K
            assert translate_tv_exact(t[i], t[j]) >= zeta / 2


def test_fano_budget():
    with pytest.raises(PackingBudgetExceeded) as info:
        fano_family(2, 0.3, 500, seed=0, budget=2000)
    assert info.value.achieved < 500


def test_assouad_tv_mode_structure():
    fam = assouad_family(3, 0.1)
    assert len(fam) == 8
    assert fam.members[0] == Simplex.standard(3)


def test_assouad_hamming_neighbours_are_close():
    zeta = 0.1
    fam = assouad_family(2, zeta)
    codes = [tuple(c) for c in fam.codes]
    for a in range(len(codes)):
        for b in range(a + 1, len(codes)):
            if sum(x != y for x, y in zip(codes[a], codes[b])) == 1:
                e = tv_uniform(fam.members[a], fam.members[b], 100_000, a * 10 + b)
                assert e.value <= 2 * zeta + 3 * e.std_error


def test_codebook_round_trip_and_injectivity():
    book = AssouadCodebook(3, 0.1)
    codes = book.sample_codes(100, 4)
    for c in codes:
        assert np.array_equal(book.encode(book.decode(c)), c)
    rng = np.random.default_rng(0)
    for _ in range(1000):
        a, b = rng.integers(0, 2, (2, book.n_bits))
        if not np.array_equal(a, b):
            assert book.decode(a) != book.decode(b)
    assert len(book.neighbors(codes[0])) == book.n_bits


def test_lecam_examples():
    s = Simplex.standard(2)
    fam = lecam_pair(s, 0.0)
    assert fam.members[0] == fam.members[1] and fam.info["tv_exact"] == 0.0
    one = lecam_pair(Simplex(np.array([[0.0], [1.0]])), 0.2)
    assert one.info["tv_exact"] == pytest.approx(0.2) and one.info["tv_linear"] == pytest.approx(0.2)
    e = tv_uniform(*lecam_pair(Simplex(np.array([[0.0], [1.0]])), 0.2).members, 100_000, 1)
    assert abs(e.value - 0.2) <= 3 * e.std_error


@pytest.mark.parametrize("K", [2, 3])
def test_lecam_tv_matches_exact_overlap(K):
    s = Simplex.standard(K)
    fam = lecam_pair(s, 0.05)
    h = fam.info["height"]
    if K == 2:
        assert h == pytest.approx(2 * 0.5 / math.sqrt(2))
    e = tv_uniform(*fam.members, 400_000, K)
    assert abs(e.value - fam.info["tv_exact"]) <= 3 * e.std_error
    # the linear value is only a first-order upper approximation
    assert fam.info["tv_exact"] <= fam.info["tv_linear"]


def test_kl_shift_bound_on_translates():
    rng = np.random.default_rng(5)
    s = Simplex.standard(2)
    for _ in range(5):
        b = rng.normal(scale=0.1, size=2)
        e = kl_noisy_mc(NoisyModel(s, 0.3), NoisyModel(s.translate(b), 0.3), 20_000, 2000, 1)
        assert e.value <= (b @ b) / (2 * 0.09) + 3 * e.std_error


def test_single_member_risk():
    fam = fano_family(2, 0.2, 2, seed=1)
    fam.members = fam.members[:1]
    r = empirical_minimax(fam, 0.0, 200, 4, hull_learner, seed=1, tv_mc=5000)
    assert r.max_risk == r.member_mean[0]
    assert r.max_risk == pytest.approx(np.mean([row[2] for row in r.rows]))


def test_tiny_sample_risk_is_reported():
    fam = fano_family(2, 0.2, 3, seed=2)
    r = empirical_minimax(fam, 0.5, 10, 3, hull_learner, seed=2, tv_mc=5000)
    print("max risk at n=10:", r.max_risk)
    assert 0 <= r.max_risk <= 1
    assert set(r.bounds) >= {"noisy_K3", "noiseless_K", "fano_statement", "fano_proof"}


def test_risk_shrinks_with_n():
    fam = fano_family(2, 0.2, 3, seed=3)
    risks = [empirical_minimax(fam, 0.0, n, 10, hull_learner, seed=3, tv_mc=5000).max_risk for n in (50, 100, 200, 400)]
    assert all(a >= b for a, b in zip(risks, risks[1:]))
