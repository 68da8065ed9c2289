import json
import math

import numpy as np
import pytest

from noisysimplex.geometry import Simplex, contains
from noisysimplex.sampler import (
    CHUNK,
    NoisyModel,
    dirichlet_uniform,
    read_samples,
    sample,
    sample_with_weights,
    write_samples,
)


def test_weights_are_on_the_simplex():
    w = dirichlet_uniform(4, 1000, 7)
    assert np.all(w >= 0)
    assert np.allclose(w.sum(1), 1.0, atol=1e-12)


def test_two_component_means():
    w = dirichlet_uniform(2, 100_000, 1)
    se = w[:, 0].std() / math.sqrt(len(w))
    assert abs(w[:, 0].mean() - 0.5) <= 3 * se


def test_component_variance():
    K = 3
    w = dirichlet_uniform(K + 1, 100_000, 2)
    target = K / ((K + 1) ** 2 * (K + 2))
    assert target == pytest.approx(0.0375)
    v = w[:, 0]
    # SE of the sample variance from the fourth central moment
    m4 = ((v - v.mean()) ** 4).mean()
    se = math.sqrt((m4 - v.var() ** 2) / len(v))
    assert abs(v.var() - target) <= 3 * se


def test_noiseless_samples_lie_inside():
    s = Simplex(np.array([[0.0, 0.0], [2.0, 0.5], [0.3, 1.7]]))
    y = sample(NoisyModel(s, 0.0), 5000, 3).points
    assert np.all(contains(s, y))


def test_noiseless_mean_is_centroid():
    s = Simplex.standard(3)
    y = sample(NoisyModel(s, 0.0), 50_000, 4).points
    se = y.std(0) / math.sqrt(len(y))
    assert np.all(np.abs(y.mean(0) - s.centroid) <= 3 * se)


def test_noise_second_moment():
    m = NoisyModel(Simplex.standard(3), 0.5)
    y, _, clean = sample_with_weights(m, 100_000, 5)
    d2 = ((y - clean) ** 2).sum(1)
    assert abs(d2.mean() - 0.75) <= 3 * d2.std() / math.sqrt(len(d2))


def test_covariance_trace_identity():
    s = Simplex(np.array([[0.0, 0.0], [1.0, 0.2], [0.1, 0.8]]))
    sigma = 0.3
    y = sample(NoisyModel(s, sigma), 200_000, 6).points
    K = 2
    cov_phi = (np.eye(K + 1) * (K + 1) - np.ones((K + 1, K + 1))) / ((K + 1) ** 2 * (K + 2))
    expected = np.trace(s.vertices.T @ cov_phi @ s.vertices) + K * sigma**2
    d2 = ((y - y.mean(0)) ** 2).sum(1)
    assert abs(d2.mean() - expected) <= 3 * d2.std() / math.sqrt(len(d2))


def test_determinism_and_chunk_independence():
    m = NoisyModel(Simplex.standard(2), 0.1)
    a = sample(m, CHUNK + 10, 9).points
    b = sample(m, CHUNK + 10, 9).points
    assert np.array_equal(a, b)
    # chunks draw from distinct sub-streams
    assert not np.array_equal(a[:10], a[CHUNK:])
    assert not np.array_equal(a, sample(m, CHUNK + 10, 10).points)


def test_common_draws_across_sigma():
    s = Simplex.standard(2)
    _, phi1, clean1 = sample_with_weights(NoisyModel(s, 0.0), 500, 11)
    _, phi2, clean2 = sample_with_weights(NoisyModel(s, 0.4), 500, 11)
    assert np.array_equal(phi1, phi2)


def test_negative_sigma_rejected():
    with pytest.raises(ValueError):
        NoisyModel(Simplex.standard(2), -0.1)


def test_csv_round_trip(tmp_path):
    m = NoisyModel(Simplex.standard(2), 0.2)
    s = sample(m, 50, 13)
    path = tmp_path / "s.csv"
    write_samples(s, path)
    assert path.read_text().splitlines()[0] == "x0,x1"
    back = read_samples(path)
    assert np.array_equal(back.points, s.points)
    meta = json.loads((tmp_path / "s.csv.json").read_text())
    assert meta["seed"] == 13 and meta["n"] == 50
    assert NoisyModel.from_dict(meta["model"]) == m
