import numpy as np
import pytest

from rkld import (Cdf, ExponentialCdf, LevyBall, MixtureCdf, NormalCdf,
                  StepCdf, UniformCdf)


def random_step_cdf(rng, max_atoms=10, scale=1.0, loc=0.0) -> StepCdf:
    n = int(rng.integers(1, max_atoms + 1))
    atoms = np.sort(rng.normal(loc, scale, size=n))
    while np.any(np.diff(atoms) <= 0):
        atoms = np.sort(rng.normal(loc, scale, size=n))
    w = rng.dirichlet(np.ones(n)) * 0.9 + 0.1 / n
    return StepCdf(atoms, w / w.sum())


def random_continuous_cdf(rng) -> Cdf:
    kind = rng.integers(0, 3)
    if kind == 0:
        return NormalCdf(float(rng.normal(0, 0.5)), float(0.5 + rng.random()))
    if kind == 1:
        a = float(rng.normal(0, 0.5))
        return UniformCdf(a, a + 0.5 + float(rng.random()))
    return ExponentialCdf(float(0.5 + rng.random()))


def random_center(rng) -> Cdf:
    if rng.random() < 0.25:
        return random_step_cdf(rng, max_atoms=4)
    return random_continuous_cdf(rng)


def random_ball(rng, continuous_only=False, min_radius=0.05) -> LevyBall:
    center = random_continuous_cdf(rng) if continuous_only else random_center(rng)
    radius = float(min_radius + (1.0 - min_radius) * rng.random())
    return LevyBall(center, radius)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
