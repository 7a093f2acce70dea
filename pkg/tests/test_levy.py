import math

import numpy as np
import pytest

from rkld import (LevyBall, NormalCdf, StepCdf, UniformCdf, ball_contains,
                  envelope, levy_distance, uniform_distance)
from rkld.levy import _certified_feasible
from conftest import random_continuous_cdf, random_step_cdf


# independent oracle: scan an increasing eps grid, checking the defining
# inequalities at the finitely many points where either side can bind
def _oracle_feasible(fa, fw, ga, gw, eps):
    def ev(x, atoms, weights):
        return float(sum(w for a, w in zip(atoms, weights) if a <= x))
    cands = set()
    for a in fa:
        cands.update((a + eps, a - eps))
    for a in ga:
        cands.update((a, a - eps, a + eps))
    for x in cands:
        if ev(x - eps, fa, fw) - eps > ev(x, ga, gw) + 1e-15:
            return False
        if ev(x, ga, gw) - eps > ev(x + eps, fa, fw) + 1e-15:
            return False
    return True


def _oracle_distance(fa, fw, ga, gw, grid):
    for eps in grid:
        if _oracle_feasible(fa, fw, ga, gw, float(eps)):
            return float(eps)
    return 1.0


def test_identity_uniform():
    u = UniformCdf(0, 1)
    assert levy_distance(u, u) == pytest.approx(0.0, abs=1e-9)


def test_point_mass_pair_exact():
    f = StepCdf([0.0], [1.0])
    g = StepCdf([0.3], [1.0])
    d = levy_distance(f, g)
    assert d == pytest.approx(0.3, abs=1e-12)
    oracle = _oracle_distance([0.0], [1.0], [0.3], [1.0], np.linspace(0, 1, 100001))
    assert d == pytest.approx(oracle, abs=2e-5)


def test_point_mass_vs_two_atoms():
    f = StepCdf([0.0], [1.0])
    g = StepCdf([-0.2, 0.2], [0.5, 0.5])
    d = levy_distance(f, g)
    assert d == pytest.approx(0.2, abs=1e-12)
    oracle = _oracle_distance([0.0], [1.0], [-0.2, 0.2], [0.5, 0.5],
                              np.linspace(0, 1, 100001))
    assert d == pytest.approx(oracle, abs=2e-5)


def test_point_mass_distance_caps_at_one():
    f = StepCdf([0.0], [1.0])
    g = StepCdf([5.0], [1.0])
    assert levy_distance(f, g) == pytest.approx(1.0, abs=1e-12)


def test_metric_axioms_on_random_steps(rng):
    for _ in range(300):
        f = random_step_cdf(rng)
        g = random_step_cdf(rng)
        h = random_step_cdf(rng)
        dfg = levy_distance(f, g)
        assert 0.0 <= dfg <= 1.0
        assert levy_distance(f, f) <= 1e-9
        assert abs(dfg - levy_distance(g, f)) <= 1e-9
        assert levy_distance(f, h) <= dfg + levy_distance(g, h) + 2e-9


def test_levy_below_uniform_distance(rng):
    for _ in range(100):
        f = random_step_cdf(rng)
        g = random_step_cdf(rng)
        assert levy_distance(f, g) <= uniform_distance(f, g) + 1e-9


def test_bisection_path_matches_exact_on_steps(rng):
    # the certified-bisection route (used for continuous inputs) against the
    # exact step/step value
    for _ in range(25):
        f = random_step_cdf(rng, max_atoms=4)
        g = random_step_cdf(rng, max_atoms=4)
        lo, hi = 0.0, 1.0
        while hi - lo > 5e-10:
            mid = 0.5 * (lo + hi)
            if _certified_feasible(f, g, mid):
                hi = mid
            else:
                lo = mid
        assert abs(hi - levy_distance(f, g)) <= 1e-9


def test_smooth_pair_distance():
    f = NormalCdf(0, 1)
    g = NormalCdf(0, 1)
    assert levy_distance(f, g) <= 1e-9
    shifted = NormalCdf(1.0, 1.0)
    d = levy_distance(f, shifted)
    # Levy distance of a unit shift: d solves Phi(t) = Phi(t - 1 + d) + d at
    # the binding point; bracketed well inside (0.2, 0.35)
    assert 0.2 < d < 0.35
    assert abs(d - levy_distance(shifted, f)) <= 1e-9


def test_envelope_normal_fig_values():
    ball = LevyBall(NormalCdf(0, 1), 0.045)
    lo, up, lol = envelope(ball, 0.0)
    assert up == pytest.approx(0.5629463455221391, abs=1e-9)
    assert lo == pytest.approx(0.43705365447786093, abs=1e-9)
    assert lol == pytest.approx(lo, abs=1e-12)


def test_envelope_point_mass_whole_space():
    ball = LevyBall(StepCdf([0.0], [1.0]), 1.0)
    for t in (-3.0, 0.0, 7.0):
        lo, up, _ = envelope(ball, t)
        assert lo == 0.0
        assert up == 1.0


def test_envelope_point_mass_left_limit():
    ball = LevyBall(StepCdf([0.0], [1.0]), 0.5)
    lo, up, lol = envelope(ball, 0.6)
    assert lol == pytest.approx(0.5, abs=1e-12)
    assert up == pytest.approx(1.0, abs=1e-12)


def test_envelope_monotone_and_min_width(rng):
    for _ in range(20):
        center = random_continuous_cdf(rng)
        radius = 0.05 + 0.9 * rng.random()
        ball = LevyBall(center, radius)
        ts = np.linspace(-6, 6, 601)
        lo = np.asarray(ball.lower(ts))
        up = np.asarray(ball.upper(ts))
        lol = np.asarray(ball.lower_left(ts))
        assert np.all(np.diff(lo) >= -1e-12)
        assert np.all(np.diff(up) >= -1e-12)
        assert np.all(lo <= up + 1e-12)
        assert np.all(up - lol >= radius - 1e-12)


def test_ball_contains_examples():
    center = StepCdf([0.0], [1.0])
    assert ball_contains(LevyBall(center, 0.5), center)
    assert ball_contains(LevyBall(center, 0.5), StepCdf([0.5], [1.0]))
    assert not ball_contains(LevyBall(center, 0.5), StepCdf([0.6], [1.0]))


def test_ball_contains_smooth_member():
    ball = LevyBall(NormalCdf(0, 1), 0.1)
    assert ball_contains(ball, NormalCdf(0.05, 1.0))
    assert not ball_contains(ball, NormalCdf(1.0, 1.0))


def test_ball_radius_validation():
    with pytest.raises(ValueError):
        LevyBall(NormalCdf(0, 1), 0.0)
    with pytest.raises(ValueError):
        LevyBall(NormalCdf(0, 1), 1.5)
