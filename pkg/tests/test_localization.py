import math

import numpy as np
import pytest
from scipy.stats import special_ortho_group

from noisysimplex.errors import InvalidConfidence, NoiseBoundUndefined
from noisysimplex.geometry import Simplex, diameter
from noisysimplex.localization import (
    LocalizationBall,
    localize,
    min_samples_localize,
    radius_from_statistic,
)
from noisysimplex.sampler import NoisyModel, SampleSet, sample


def test_identical_samples_give_a_point_ball():
    c = np.array([1.0, -2.0, 0.5])
    ball = localize(SampleSet(np.tile(c, (10, 1)), 0))
    assert np.array_equal(ball.center, c)
    assert ball.statistic == 0.0 and ball.radius == 0.0


def test_sample_count_examples():
    assert min_samples_localize(3, 0.1) == 81887
    # delta = 6/e (unit log) is not a valid confidence, so check the log scaling instead
    d = 6 / math.e**2
    assert min_samples_localize(2, d) == 2 * 12000
    assert min_samples_localize(4, 0.1) > min_samples_localize(3, 0.1)
    with pytest.raises(InvalidConfidence):
        min_samples_localize(3, 1.5)


def test_radius_formula():
    assert radius_from_statistic(1.0, 3) == pytest.approx(8 * math.sqrt(20))


def test_noise_bound_undefined_at_low_dimension():
    data = sample(NoisyModel(Simplex.standard(2), 0.1), 200, 1)
    with pytest.raises(NoiseBoundUndefined) as info:
        localize(data)
    assert info.value.ball is not None and math.isnan(info.value.ball.noise_bound)
    # the proof variant needs K >= 4
    with pytest.raises(NoiseBoundUndefined):
        localize(sample(NoisyModel(Simplex.standard(3), 0.1), 200, 1), "proof")
    assert localize(sample(NoisyModel(Simplex.standard(4), 0.1), 200, 1), "proof").noise_bound > 0


def test_noiseless_radius_exceeds_diameter():
    s = Simplex.standard(3)
    ball = localize(sample(NoisyModel(s, 0.0), 20_000, 2))
    assert ball.radius >= diameter(s)


def test_translation_equivariance():
    data = sample(NoisyModel(Simplex.standard(3), 0.2), 1000, 3)
    b = np.array([3.0, -1.0, 2.0])
    a, c = localize(data), localize(SampleSet(data.points + b, 0))
    assert np.allclose(c.center, a.center + b)
    for f in ("statistic", "radius", "noise_bound"):
        assert getattr(c, f) == pytest.approx(getattr(a, f), rel=1e-10)


def test_rotation_invariance():
    data = sample(NoisyModel(Simplex.standard(3), 0.2), 1000, 4)
    Q = special_ortho_group.rvs(3, random_state=5)
    a, c = localize(data), localize(SampleSet(data.points @ Q.T, 0))
    for f in ("statistic", "radius", "noise_bound"):
        assert getattr(c, f) == pytest.approx(getattr(a, f), rel=1e-10)


def test_coverage_at_reduced_sample_size():
    # reduced m: the empirical failure rate is reported, and with this much
    # slack in the radius it stays at zero
    s = Simplex(np.array([[0, 0, 0], [1, 0.1, 0], [0.2, 1, 0], [0.1, 0.3, 1.2]], dtype=float))
    fails = 0
    for t in range(100):
        ball = localize(sample(NoisyModel(s, 0.2), 2000, t))
        fails += not (ball.contains_simplex(s.vertices) and 0.04 <= ball.noise_bound)
    assert fails / 100 <= 0.1


def test_ball_round_trip():
    ball = localize(sample(NoisyModel(Simplex.standard(3), 0.2), 500, 6))
    back = LocalizationBall.from_dict(ball.to_dict())
    assert np.array_equal(back.center, ball.center) and back.radius == ball.radius
