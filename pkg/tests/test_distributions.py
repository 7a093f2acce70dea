import math

import numpy as np
import pytest

from rkld import (ExponentialCdf, MixtureCdf, NormalCdf, Partition, StepCdf,
                  TabulatedCdf, UniformCdf, cdf_from_spec, empirical_from_samples,
                  load_samples, quantize)
from conftest import random_continuous_cdf, random_step_cdf


ALL_FAMILIES = [
    NormalCdf(0.0, 1.0),
    NormalCdf(-2.0, 0.3),
    UniformCdf(0.0, 1.0),
    ExponentialCdf(2.0),
    TabulatedCdf([0.0, 1.0, 3.0], [0.0, 0.8, 1.0]),
    StepCdf([-1.0, 0.5, 2.0], [0.2, 0.5, 0.3]),
    MixtureCdf((NormalCdf(0, 1), UniformCdf(-1, 1)), [0.3, 0.7]),
]


@pytest.mark.parametrize("cdf", ALL_FAMILIES)
def test_cdf_monotone_and_limited(cdf):
    ts = np.linspace(-15, 15, 2001)
    vals = cdf.eval(ts)
    assert np.all(np.diff(vals) >= -1e-15)
    assert np.all((vals >= 0) & (vals <= 1))
    assert cdf.eval(-1e9) <= 1e-12
    assert cdf.eval(1e9) >= 1 - 1e-12
    assert np.all(np.asarray(cdf.left_limit(ts)) <= vals + 1e-15)


@pytest.mark.parametrize("cdf", ALL_FAMILIES)
def test_quantile_brackets_level(cdf):
    for p in (0.01, 0.2, 0.5, 0.77, 0.99):
        r = cdf.quantile(p)
        assert cdf.left_limit(r) <= p + 1e-9
        assert cdf.eval(r) >= p - 1e-9
    with pytest.raises(ValueError):
        cdf.quantile(0.0)
    with pytest.raises(ValueError):
        cdf.quantile(1.0)


def test_continuous_variants_have_no_jumps():
    for cdf in ALL_FAMILIES:
        if cdf.continuous:
            ts = np.linspace(-5, 5, 101)
            assert np.allclose(np.asarray(cdf.left_limit(ts)), cdf.eval(ts))
    assert not StepCdf([0.0], [1.0]).continuous
    mixed = MixtureCdf((NormalCdf(0, 1), StepCdf([0.0], [1.0])), [0.5, 0.5])
    assert not mixed.continuous


def test_step_cdf_eval_and_left_limit():
    f = StepCdf([0.0, 1.0], [0.25, 0.75])
    assert f.eval(-0.5) == 0.0
    assert f.eval(0.0) == 0.25
    assert f.left_limit(0.0) == 0.0
    assert f.eval(0.5) == 0.25
    assert f.eval(1.0) == 1.0
    assert f.left_limit(1.0) == 0.25
    assert f.quantile(0.25) == 0.0
    assert f.quantile(0.26) == 1.0


def test_step_cdf_validation():
    with pytest.raises(ValueError, match="strictly increasing"):
        StepCdf([1.0, 1.0], [0.5, 0.5])
    with pytest.raises(ValueError, match="positive"):
        StepCdf([0.0, 1.0], [0.0, 1.0])
    with pytest.raises(ValueError, match="renormalization is refused"):
        StepCdf([0.0, 1.0], [0.5, 0.6])
    with pytest.raises(ValueError, match="finite"):
        StepCdf([0.0, np.inf], [0.5, 0.5])


def test_empirical_from_samples_counts():
    f = empirical_from_samples([1.0, 2.0, 2.0, 3.0])
    assert np.array_equal(f.atoms, [1.0, 2.0, 3.0])
    assert np.allclose(f.weights, [0.25, 0.5, 0.25])


def test_empirical_single_point_mass():
    f = empirical_from_samples([5.0])
    assert np.array_equal(f.atoms, [5.0])
    assert np.array_equal(f.weights, [1.0])


def test_empirical_rejects_empty_and_nonfinite():
    with pytest.raises(ValueError, match="no samples"):
        empirical_from_samples([])
    with pytest.raises(ValueError, match="index 2"):
        empirical_from_samples([1.0, 2.0, math.nan])


def test_quantize_examples():
    assert np.allclose(quantize(UniformCdf(0, 1), Partition([0.5])), [0.5, 0.5])
    assert np.allclose(quantize(StepCdf([0.0], [1.0]), Partition([-1.0, 1.0])),
                       [0.0, 1.0, 0.0])
    assert np.allclose(quantize(NormalCdf(0, 1), Partition([0.0])), [0.5, 0.5])


def test_quantize_components_sum_to_one(rng):
    for _ in range(50):
        cdf = random_step_cdf(rng) if rng.random() < 0.5 else random_continuous_cdf(rng)
        cuts = np.sort(rng.normal(0, 2, size=int(rng.integers(1, 8))))
        cuts = cuts[np.concatenate(([True], np.diff(cuts) > 0))]
        comps = quantize(cdf, Partition(cuts))
        assert np.all(comps >= -1e-15)
        assert abs(comps.sum() - 1.0) <= 1e-12


def test_quantize_merging_adjacent_cells(rng):
    # merging two adjacent cells must reproduce the coarse component
    for _ in range(30):
        cdf = random_continuous_cdf(rng)
        fine_cuts = np.sort(rng.normal(0, 2, size=5))
        if np.any(np.diff(fine_cuts) <= 0):
            continue
        coarse_cuts = np.delete(fine_cuts, 2)
        fine = quantize(cdf, Partition(fine_cuts))
        coarse = quantize(cdf, Partition(coarse_cuts))
        merged = np.concatenate((fine[:2], [fine[2] + fine[3]], fine[4:]))
        assert np.allclose(merged, coarse, atol=1e-12)


def test_partition_validation():
    with pytest.raises(ValueError):
        Partition([])
    with pytest.raises(ValueError):
        Partition([1.0, 1.0])
    assert Partition([0.0, 1.0]).n_cells == 3


def test_tabulated_requires_full_range():
    with pytest.raises(ValueError, match="start at 0 and end at 1"):
        TabulatedCdf([0.0, 1.0], [0.1, 1.0])
    f = TabulatedCdf([0.0, 2.0], [0.0, 1.0])
    assert f.eval(1.0) == 0.5
    assert f.eval(-1.0) == 0.0
    assert f.eval(3.0) == 1.0


def test_mixture_validation_and_eval():
    with pytest.raises(ValueError):
        MixtureCdf((NormalCdf(),), [0.5])
    m = MixtureCdf((UniformCdf(0, 1), UniformCdf(1, 2)), [0.5, 0.5])
    assert m.eval(1.0) == pytest.approx(0.5)
    assert m.quantile(0.25) == pytest.approx(0.5, abs=1e-9)


def test_spec_round_trip():
    for cdf in ALL_FAMILIES:
        again = cdf_from_spec(cdf.to_spec())
        ts = np.linspace(-4, 4, 101)
        assert np.allclose(again.eval(ts), cdf.eval(ts))


def test_spec_errors():
    with pytest.raises(ValueError, match="family"):
        cdf_from_spec({"mean": 0})
    with pytest.raises(ValueError, match="unknown"):
        cdf_from_spec({"family": "cauchy"})
    with pytest.raises(ValueError, match="missing field"):
        cdf_from_spec({"family": "normal", "mean": 0})


def test_load_samples(tmp_path):
    path = tmp_path / "samples.txt"
    path.write_text("# header\n1.5\n\n2.5\n-0.25\n")
    assert np.array_equal(load_samples(str(path)), [1.5, 2.5, -0.25])
    bad = tmp_path / "bad.txt"
    bad.write_text("1.0\nxyz\n")
    with pytest.raises(ValueError, match="bad.txt:2"):
        load_samples(str(bad))
    inf = tmp_path / "inf.txt"
    inf.write_text("inf\n")
    with pytest.raises(ValueError, match="non-finite"):
        load_samples(str(inf))
    empty = tmp_path / "empty.txt"
    empty.write_text("# nothing\n")
    with pytest.raises(ValueError, match="no samples"):
        load_samples(str(empty))


def test_inverse_sample_matches_quantile(rng):
    u = rng.random(64) * 0.98 + 0.01
    for cdf in ALL_FAMILIES:
        if isinstance(cdf, MixtureCdf):
            continue  # mixtures sample by component selection, not the quantile map
        xs = cdf.inverse_sample(u)
        for ui, xi in zip(u, xs):
            assert cdf.left_limit(xi) <= ui + 1e-9
            assert cdf.eval(xi) >= ui - 1e-9


def test_mixture_inverse_sample_distribution(rng):
    # component-selection sampling reproduces the mixture CDF
    m = MixtureCdf((UniformCdf(0, 1), NormalCdf(3, 0.5)), [0.4, 0.6])
    u = rng.random(20000) * (1 - 2e-12) + 1e-12
    xs = np.sort(m.inverse_sample(u))
    emp = np.arange(1, xs.size + 1) / xs.size
    assert np.max(np.abs(emp - m.eval(xs))) < 0.02
