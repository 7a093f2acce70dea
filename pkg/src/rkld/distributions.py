"""Scalar distribution representations used across the package.

Every distribution is exposed through its CDF: a right-continuous
nondecreasing function on the real line with limits 0 and -> 1.  Parametric
families (normal, uniform, exponential, mixtures) and tabulated
piecewise-linear CDFs are continuous; :class:`StepCdf` carries a finite set
of atoms and is the representation of empirical measures.

All evaluation methods accept scalars or numpy arrays and are pure; the
objects are immutable after construction and safe to share between threads
or processes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, ndtri

WEIGHT_TOL = 1e-12
_QUANTILE_TOL = 1e-12


def _as_float_array(t):
    return np.asarray(t, dtype=float)


def _scalar_or_array(values, scalar_input):
    if scalar_input:
        return float(values)
    return values


class Cdf:
    """Base class for cumulative distribution functions.

    Subclasses implement ``_eval`` (vectorized, right-continuous) and
    ``quantile``.  ``left_limit`` defaults to ``eval`` which is correct for
    every continuous variant; :class:`StepCdf` overrides it.
    """

    #: True when the CDF has no jumps.
    continuous = True

    def _eval(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def eval(self, t):
        arr = _as_float_array(t)
        if arr.ndim == 0:
            return float(self._eval(arr.reshape(1))[0])
        return self._eval(arr)

    __call__ = eval

    def left_limit(self, t):
        return self.eval(t)

    def quantile(self, p: float) -> float:
        """Smallest r with eval(r) >= p, for p in the open interval (0, 1)."""
        raise NotImplementedError

    def inverse_sample(self, u: np.ndarray) -> np.ndarray:
        """Map uniforms in (0,1) to samples through the quantile function."""
        return np.array([self.quantile(float(v)) for v in np.asarray(u)])

    # Hooks used by the Levy-metric machinery.
    def jump_points(self) -> np.ndarray:
        return np.empty(0)

    def lipschitz_bound(self) -> float:
        """Upper bound on the slope of the continuous part of the CDF."""
        raise NotImplementedError

    def to_spec(self) -> dict:
        raise NotImplementedError

    def _check_quantile_arg(self, p):
        if not 0.0 < p < 1.0:
            raise ValueError(f"quantile level must be in (0, 1), got {p}")


def _bisect_quantile(cdf: Cdf, p: float, lo: float, hi: float) -> float:
    # expand the bracket until cdf(lo) < p <= cdf(hi)
    span = max(1.0, hi - lo)
    for _ in range(200):
        if cdf.eval(lo) < p:
            break
        lo -= span
        span *= 2.0
    span = max(1.0, hi - lo)
    for _ in range(200):
        if cdf.eval(hi) >= p:
            break
        hi += span
        span *= 2.0
    while hi - lo > _QUANTILE_TOL:
        mid = 0.5 * (lo + hi)
        if cdf.eval(mid) >= p:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class NormalCdf(Cdf):
    mean: float = 0.0
    std: float = 1.0

    def __post_init__(self):
        if not (self.std > 0 and math.isfinite(self.std) and math.isfinite(self.mean)):
            raise ValueError("normal requires finite mean and std > 0")

    def _eval(self, t):
        return ndtr((t - self.mean) / self.std)

    def quantile(self, p):
        self._check_quantile_arg(p)
        return self.mean + self.std * float(ndtri(p))

    def inverse_sample(self, u):
        return self.mean + self.std * ndtri(np.asarray(u, dtype=float))

    def lipschitz_bound(self):
        return 1.0 / (self.std * math.sqrt(2.0 * math.pi))

    def to_spec(self):
        return {"family": "normal", "mean": self.mean, "std": self.std}


@dataclass(frozen=True)
class UniformCdf(Cdf):
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if not (self.a < self.b and math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("uniform requires finite a < b")

    def _eval(self, t):
        return np.clip((t - self.a) / (self.b - self.a), 0.0, 1.0)

    def quantile(self, p):
        self._check_quantile_arg(p)
        return self.a + p * (self.b - self.a)

    def inverse_sample(self, u):
        return self.a + np.asarray(u, dtype=float) * (self.b - self.a)

    def lipschitz_bound(self):
        return 1.0 / (self.b - self.a)

    def to_spec(self):
        return {"family": "uniform", "a": self.a, "b": self.b}


@dataclass(frozen=True)
class ExponentialCdf(Cdf):
    rate: float = 1.0

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ValueError("exponential requires rate > 0")

    def _eval(self, t):
        out = -np.expm1(-self.rate * np.maximum(t, 0.0))
        return np.where(t < 0.0, 0.0, out)

    def quantile(self, p):
        self._check_quantile_arg(p)
        return -math.log1p(-p) / self.rate

    def inverse_sample(self, u):
        return -np.log1p(-np.asarray(u, dtype=float)) / self.rate

    def lipschitz_bound(self):
        return self.rate

    def to_spec(self):
        return {"family": "exponential", "rate": self.rate}


@dataclass(frozen=True, eq=False)
class TabulatedCdf(Cdf):
    """Piecewise-linear CDF through given (t, F) breakpoints.

    The first F value must be 0 and the last 1 (within 1e-12), so the
    function is continuous; outside the breakpoints it is 0 to the left and
    1 to the right.
    """

    ts: np.ndarray
    fs: np.ndarray

    def __post_init__(self):
        ts = _as_float_array(self.ts)
        fs = _as_float_array(self.fs)
        if ts.ndim != 1 or ts.shape != fs.shape or ts.size < 2:
            raise ValueError("tabulated CDF needs matching 1-D t and F arrays, length >= 2")
        if not np.all(np.diff(ts) > 0):
            raise ValueError("tabulated breakpoints must be strictly increasing")
        if np.any(np.diff(fs) < 0):
            raise ValueError("tabulated F values must be nondecreasing")
        if abs(fs[0]) > WEIGHT_TOL or abs(fs[-1] - 1.0) > WEIGHT_TOL:
            raise ValueError("tabulated F values must start at 0 and end at 1")
        fs = fs.copy()
        fs[0], fs[-1] = 0.0, 1.0
        object.__setattr__(self, "ts", ts)
        object.__setattr__(self, "fs", fs)

    def _eval(self, t):
        return np.interp(t, self.ts, self.fs, left=0.0, right=1.0)

    def quantile(self, p):
        self._check_quantile_arg(p)
        return _bisect_quantile(self, p, self.ts[0], self.ts[-1])

    def lipschitz_bound(self):
        return float(np.max(np.diff(self.fs) / np.diff(self.ts)))

    def to_spec(self):
        return {"family": "tabulated", "t": self.ts.tolist(), "F": self.fs.tolist()}


@dataclass(frozen=True, eq=False)
class StepCdf(Cdf):
    """Finite-support distribution: strictly increasing atoms with positive
    weights summing to one.

    ``eval(t)`` is the total weight of atoms <= t; jumps occur exactly at
    the atoms.  The weight sum is validated to 1e-12 and never silently
    renormalized.
    """

    atoms: np.ndarray
    weights: np.ndarray
    cums: np.ndarray = field(init=False, repr=False, compare=False)

    continuous = False

    def __post_init__(self):
        atoms = _as_float_array(self.atoms)
        weights = _as_float_array(self.weights)
        if atoms.ndim != 1 or atoms.shape != weights.shape or atoms.size == 0:
            raise ValueError("atoms and weights must be matching nonempty 1-D arrays")
        if not np.all(np.isfinite(atoms)):
            raise ValueError("atoms must be finite")
        if not np.all(np.diff(atoms) > 0):
            raise ValueError("atoms must be strictly increasing")
        if np.any(weights <= 0):
            raise ValueError("weights must be positive")
        total = float(np.sum(weights))
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValueError(
                f"weights sum to {total!r}; expected 1 within {WEIGHT_TOL} "
                "(renormalization is refused)")
        cums = np.cumsum(weights)
        cums[-1] = 1.0
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "cums", cums)

    @property
    def n_atoms(self) -> int:
        return int(self.atoms.size)

    def _eval(self, t):
        idx = np.searchsorted(self.atoms, t, side="right")
        return np.concatenate(([0.0], self.cums))[idx]

    def left_limit(self, t):
        arr = _as_float_array(t)
        idx = np.searchsorted(self.atoms, np.atleast_1d(arr), side="left")
        vals = np.concatenate(([0.0], self.cums))[idx]
        return _scalar_or_array(vals[0] if arr.ndim == 0 else vals, arr.ndim == 0)

    def quantile(self, p):
        self._check_quantile_arg(p)
        idx = int(np.searchsorted(self.cums, p, side="left"))
        return float(self.atoms[min(idx, self.n_atoms - 1)])

    def inverse_sample(self, u):
        idx = np.searchsorted(self.cums, np.asarray(u, dtype=float), side="left")
        return self.atoms[np.minimum(idx, self.n_atoms - 1)]

    def jump_points(self):
        return self.atoms

    def lipschitz_bound(self):
        return 0.0

    def to_spec(self):
        return {"family": "discrete", "atoms": self.atoms.tolist(),
                "weights": self.weights.tolist()}


@dataclass(frozen=True, eq=False)
class MixtureCdf(Cdf):
    """Convex combination of component CDFs."""

    components: tuple
    mix_weights: np.ndarray

    def __post_init__(self):
        comps = tuple(self.components)
        w = _as_float_array(self.mix_weights)
        if len(comps) == 0 or w.shape != (len(comps),):
            raise ValueError("mixture needs one weight per component")
        if np.any(w <= 0):
            raise ValueError("mixture weights must be positive")
        if abs(float(np.sum(w)) - 1.0) > WEIGHT_TOL:
            raise ValueError("mixture weights must sum to 1 within 1e-12")
        if not all(isinstance(c, Cdf) for c in comps):
            raise ValueError("mixture components must be Cdf instances")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "mix_weights", w)
        object.__setattr__(self, "continuous", all(c.continuous for c in comps))

    def _eval(self, t):
        acc = np.zeros_like(_as_float_array(t))
        for c, w in zip(self.components, self.mix_weights):
            acc = acc + w * c._eval(t)
        return acc

    def left_limit(self, t):
        arr = _as_float_array(t)
        acc = np.zeros_like(np.atleast_1d(arr))
        for c, w in zip(self.components, self.mix_weights):
            acc = acc + w * np.atleast_1d(c.left_limit(arr))
        return _scalar_or_array(acc[0] if arr.ndim == 0 else acc, arr.ndim == 0)

    def quantile(self, p):
        self._check_quantile_arg(p)
        return _bisect_quantile(self, p, -1.0, 1.0)

    def inverse_sample(self, u):
        # Component selection and conditional inversion from a single
        # uniform: the slab index picks the component, the position within
        # the slab is again uniform.
        u = np.asarray(u, dtype=float)
        cuts = np.cumsum(self.mix_weights)
        idx = np.minimum(np.searchsorted(cuts, u, side="right"),
                         len(self.components) - 1)
        lo = np.concatenate(([0.0], cuts))[idx]
        v = (u - lo) / self.mix_weights[idx]
        v = np.clip(v, 2.0 ** -54, 1.0 - 2.0 ** -54)
        out = np.empty_like(u)
        for k, comp in enumerate(self.components):
            mask = idx == k
            if np.any(mask):
                out[mask] = comp.inverse_sample(v[mask])
        return out

    def jump_points(self):
        pts = [c.jump_points() for c in self.components]
        return np.unique(np.concatenate(pts)) if pts else np.empty(0)

    def lipschitz_bound(self):
        return float(sum(w * c.lipschitz_bound()
                         for c, w in zip(self.components, self.mix_weights)))

    def to_spec(self):
        return {"family": "mixture",
                "weights": self.mix_weights.tolist(),
                "components": [c.to_spec() for c in self.components]}


@dataclass(frozen=True, eq=False)
class Partition:
    """Cut points a_1 < ... < a_{m-1} splitting the line into m half-open cells."""

    cuts: np.ndarray

    def __post_init__(self):
        cuts = _as_float_array(self.cuts)
        if cuts.ndim != 1 or cuts.size < 1:
            raise ValueError("a partition needs at least one cut point")
        if not np.all(np.isfinite(cuts)):
            raise ValueError("cut points must be finite")
        if not np.all(np.diff(cuts) > 0):
            raise ValueError("cut points must be strictly increasing")
        object.__setattr__(self, "cuts", cuts)

    @property
    def n_cells(self) -> int:
        return int(self.cuts.size) + 1


def quantize(cdf: Cdf, partition: Partition) -> np.ndarray:
    """Probability vector of the CDF's mass in each partition cell."""
    ends = np.concatenate((cdf.eval(partition.cuts), [1.0]))
    starts = np.concatenate(([0.0], ends[:-1]))
    return ends - starts


def empirical_from_samples(samples) -> StepCdf:
    """Empirical distribution of the samples: mass 1/n at each observation."""
    arr = _as_float_array(samples)
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    if arr.size == 0:
        raise ValueError("no samples")
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        raise ValueError(f"non-finite sample at index {int(bad[0])}")
    atoms, counts = np.unique(arr, return_counts=True)
    return StepCdf(atoms, counts / arr.size)


def cdf_from_spec(spec) -> Cdf:
    """Build a Cdf from its JSON description.

    The accepted object shape is ``{"family": ..., ...family fields...}``
    with families ``normal`` (mean, std), ``uniform`` (a, b),
    ``exponential`` (rate), ``mixture`` (components, weights),
    ``tabulated`` (t, F) and ``discrete`` (atoms, weights).
    """
    if isinstance(spec, str):
        spec = json.loads(spec)
    if not isinstance(spec, dict) or "family" not in spec:
        raise ValueError("distribution spec must be an object with a 'family' field")
    family = spec["family"]
    try:
        if family == "normal":
            return NormalCdf(float(spec["mean"]), float(spec["std"]))
        if family == "uniform":
            return UniformCdf(float(spec["a"]), float(spec["b"]))
        if family == "exponential":
            return ExponentialCdf(float(spec["rate"]))
        if family == "mixture":
            comps = [cdf_from_spec(c) for c in spec["components"]]
            return MixtureCdf(tuple(comps), _as_float_array(spec["weights"]))
        if family == "tabulated":
            return TabulatedCdf(_as_float_array(spec["t"]), _as_float_array(spec["F"]))
        if family == "discrete":
            return StepCdf(_as_float_array(spec["atoms"]), _as_float_array(spec["weights"]))
    except KeyError as exc:
        raise ValueError(f"distribution spec for family {family!r} is missing field {exc}")
    raise ValueError(f"unknown distribution family {family!r}")


def load_samples(path: str) -> np.ndarray:
    """Read one finite decimal per line; blank lines and '#' comments skipped."""
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                x = float(text)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: not a number: {text!r}") from None
            if not math.isfinite(x):
                raise ValueError(f"{path}:{lineno}: non-finite value {text!r}")
            values.append(x)
    if not values:
        raise ValueError(f"{path}: no samples")
    return np.array(values, dtype=float)
