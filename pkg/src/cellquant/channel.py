"""Binary-input continuous-output channels and their discretization.

A channel is a binary prior ``(p1, p2)`` together with the two conditional
output densities ``phi1(y)`` and ``phi2(y)``.  :func:`discretize` turns the
continuous output line into a finite set of atoms, each carrying a
probability mass and a posterior ``r = P(x1 | y)``.  Everything downstream
works on the resulting :class:`PosteriorGrid`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from cellquant.errors import DomainError, EmptyGridError, UndefinedPosteriorError

__all__ = [
    "BinaryPrior",
    "DensitySpec",
    "ChannelSpec",
    "PosteriorGrid",
    "gaussian",
    "laplace",
    "uniform",
    "tabulated",
    "eval_density",
    "log_density",
    "compute_posterior",
    "discretize",
    "default_range",
]

_PRIOR_TOL = 1e-12
_TABULATED_TOL = 1e-6
_FAMILIES = ("gaussian", "laplace", "uniform", "tabulated")
_trapezoid = getattr(np, "trapezoid", None) or np.trapz


@dataclass(frozen=True)
class BinaryPrior:
    p1: float
    p2: float | None = None

    def __post_init__(self):
        p1 = float(self.p1)
        p2 = 1.0 - p1 if self.p2 is None else float(self.p2)
        if not (p1 > 0.0 and p2 > 0.0):
            raise DomainError("prior probabilities must be strictly positive")
        if abs(p1 + p2 - 1.0) > _PRIOR_TOL:
            raise DomainError(f"prior must sum to 1, got {p1 + p2!r}")
        object.__setattr__(self, "p1", p1)
        object.__setattr__(self, "p2", p2)


@dataclass(frozen=True, eq=False)
class DensitySpec:
    """One conditional output density.

    Use the constructors :func:`gaussian`, :func:`laplace`, :func:`uniform`
    and :func:`tabulated` rather than building this directly.  ``params``
    holds ``(mean, stddev)``, ``(location, scale)``, ``(low, high)`` or the
    knot arrays ``(ys, densities)`` respectively.
    """

    family: str
    params: tuple = field(default=())

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise DomainError(f"unknown density family {self.family!r}")
        if self.family == "gaussian":
            mean, sd = map(float, self.params)
            if not sd > 0:
                raise DomainError("gaussian stddev must be > 0")
            object.__setattr__(self, "params", (mean, sd))
        elif self.family == "laplace":
            loc, scale = map(float, self.params)
            if not scale > 0:
                raise DomainError("laplace scale must be > 0")
            object.__setattr__(self, "params", (loc, scale))
        elif self.family == "uniform":
            low, high = map(float, self.params)
            if not low < high:
                raise DomainError("uniform requires low < high")
            object.__setattr__(self, "params", (low, high))
        else:
            ys, dens = self.params
            ys = np.asarray(ys, dtype=float)
            dens = np.asarray(dens, dtype=float)
            if ys.ndim != 1 or ys.shape != dens.shape or ys.size < 2:
                raise DomainError("tabulated density needs >= 2 (y, density) knots")
            if np.any(np.diff(ys) <= 0):
                raise DomainError("tabulated knots must be strictly increasing in y")
            if np.any(dens < 0):
                raise DomainError("tabulated densities must be nonnegative")
            area = float(_trapezoid(dens, ys))
            if abs(area - 1.0) > _TABULATED_TOL:
                raise DomainError(f"tabulated density integrates to {area!r}, not 1")
            ys.flags.writeable = False
            dens.flags.writeable = False
            object.__setattr__(self, "params", (ys, dens))

    @property
    def support(self) -> tuple[float, float]:
        """Interval outside which the density is zero (may be infinite)."""
        if self.family in ("gaussian", "laplace"):
            return (-math.inf, math.inf)
        if self.family == "uniform":
            return self.params
        ys = self.params[0]
        return (float(ys[0]), float(ys[-1]))

    @property
    def envelope(self) -> tuple[float, float]:
        """Default truncation range: mean +/- 6 standard deviations."""
        if self.family == "gaussian":
            mean, sd = self.params
            return (mean - 6 * sd, mean + 6 * sd)
        if self.family == "laplace":
            loc, scale = self.params
            sd = math.sqrt(2.0) * scale
            return (loc - 6 * sd, loc + 6 * sd)
        return self.support

    def to_dict(self) -> dict:
        if self.family == "gaussian":
            return {"family": "gaussian", "mean": self.params[0], "stddev": self.params[1]}
        if self.family == "laplace":
            return {"family": "laplace", "location": self.params[0], "scale": self.params[1]}
        if self.family == "uniform":
            return {"family": "uniform", "low": self.params[0], "high": self.params[1]}
        ys, dens = self.params
        return {"family": "tabulated", "knots": [[float(a), float(b)] for a, b in zip(ys, dens)]}


def gaussian(mean: float, stddev: float) -> DensitySpec:
    return DensitySpec("gaussian", (mean, stddev))


def laplace(location: float, scale: float) -> DensitySpec:
    return DensitySpec("laplace", (location, scale))


def uniform(low: float, high: float) -> DensitySpec:
    return DensitySpec("uniform", (low, high))


def tabulated(knots: Sequence[Sequence[float]]) -> DensitySpec:
    """Piecewise-linear density through ``(y, density)`` knots."""
    arr = np.asarray(knots, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DomainError("knots must be a sequence of (y, density) pairs")
    return DensitySpec("tabulated", (arr[:, 0], arr[:, 1]))


@dataclass(frozen=True)
class ChannelSpec:
    prior: BinaryPrior
    phi1: DensitySpec
    phi2: DensitySpec

    @property
    def support(self) -> tuple[float, float]:
        """Range on which both densities can be evaluated."""
        lo1, hi1 = _evaluable(self.phi1)
        lo2, hi2 = _evaluable(self.phi2)
        lo, hi = max(lo1, lo2), min(hi1, hi2)
        if not lo < hi:
            raise DomainError("densities have no common evaluable support")
        return lo, hi


def _evaluable(spec: DensitySpec) -> tuple[float, float]:
    # Uniform densities can be evaluated (as zero) everywhere; tabulated ones cannot.
    if spec.family == "tabulated":
        return spec.support
    return (-math.inf, math.inf)


def _density_array(spec: DensitySpec, y: np.ndarray) -> np.ndarray:
    if spec.family == "gaussian":
        mean, sd = spec.params
        z = (y - mean) / sd
        return np.exp(-0.5 * z * z) / (sd * math.sqrt(2.0 * math.pi))
    if spec.family == "laplace":
        loc, scale = spec.params
        return np.exp(-np.abs(y - loc) / scale) / (2.0 * scale)
    if spec.family == "uniform":
        low, high = spec.params
        return np.where((y >= low) & (y <= high), 1.0 / (high - low), 0.0)
    ys, dens = spec.params
    if np.any(y < ys[0]) or np.any(y > ys[-1]):
        raise DomainError(f"y outside tabulated knot range [{ys[0]}, {ys[-1]}]")
    return np.interp(y, ys, dens)


def eval_density(spec: DensitySpec, y):
    """Evaluate the density at ``y`` (scalar or array).

    Raises :class:`DomainError` for tabulated densities outside the knot range.
    """
    arr = np.asarray(y, dtype=float)
    out = _density_array(spec, arr)
    return float(out) if out.ndim == 0 else out


def log_density(spec: DensitySpec, y):
    """Natural log of the density; ``-inf`` where the density is zero.

    Gaussian and Laplace are evaluated in closed log form so that far tails
    do not underflow.
    """
    arr = np.asarray(y, dtype=float)
    if spec.family == "gaussian":
        mean, sd = spec.params
        z = (arr - mean) / sd
        out = -0.5 * z * z - math.log(sd * math.sqrt(2.0 * math.pi))
    elif spec.family == "laplace":
        loc, scale = spec.params
        out = -np.abs(arr - loc) / scale - math.log(2.0 * scale)
    else:
        with np.errstate(divide="ignore"):
            out = np.log(_density_array(spec, arr))
    return float(out) if np.ndim(out) == 0 else out


def compute_posterior(prior: BinaryPrior, phi1_val: float, phi2_val: float) -> float:
    """Posterior probability of ``x1`` given an output with these density values."""
    if phi1_val < 0 or phi2_val < 0:
        raise DomainError("density values must be nonnegative")
    a = prior.p1 * phi1_val
    b = prior.p2 * phi2_val
    if a + b == 0:
        raise UndefinedPosteriorError("both densities are zero at this output")
    return a / (a + b)


@dataclass(frozen=True, eq=False)
class PosteriorGrid:
    """Discrete atoms sorted by posterior ``r`` (ties by ``y``).

    Attributes
    ----------
    y, mass, r : ndarray
        Output value, probability mass and posterior of each atom, in
        storage (r-ascending) order.
    original_index : ndarray of int
        Position of each atom in the y-ordered grid it was built from.
    """

    y: np.ndarray
    mass: np.ndarray
    r: np.ndarray
    original_index: np.ndarray

    def __post_init__(self):
        for name in ("y", "mass", "r", "original_index"):
            getattr(self, name).flags.writeable = False

    @classmethod
    def from_atoms(cls, r, mass, y=None, *, normalize=True) -> "PosteriorGrid":
        """Build a grid from raw posteriors and masses (any order).

        ``y`` defaults to the input position, which makes the input order the
        y-order.  Zero-mass atoms are dropped.
        """
        r = np.asarray(r, dtype=float).ravel()
        mass = np.asarray(mass, dtype=float).ravel()
        if r.shape != mass.shape:
            raise DomainError("r and mass must have the same length")
        if np.any(mass < 0) or np.any(~np.isfinite(mass)):
            raise DomainError("masses must be finite and nonnegative")
        if np.any((r < 0) | (r > 1)):
            raise DomainError("posteriors must lie in [0, 1]")
        y = np.arange(r.size, dtype=float) if y is None else np.asarray(y, dtype=float).ravel()
        index = np.arange(r.size)
        keep = mass > 0
        r, mass, y, index = r[keep], mass[keep], y[keep], index[keep]
        if r.size == 0:
            raise EmptyGridError("grid has no atom with positive mass")
        if normalize:
            mass = mass / mass.sum()
        order = np.lexsort((y, r))
        return cls(y=y[order].copy(), mass=mass[order].copy(), r=r[order].copy(),
                   original_index=index[order].copy())

    def __len__(self) -> int:
        return int(self.r.size)

    @property
    def size(self) -> int:
        return int(self.r.size)

    def y_order(self) -> np.ndarray:
        """Permutation that lists storage positions in ascending y."""
        return np.argsort(self.original_index, kind="stable")

    def distinct_r_count(self) -> int:
        return int(np.unique(self.r).size)

    def x1_mass(self) -> float:
        """Probability of ``x1`` implied by the grid (sum of mass * r)."""
        return float(np.dot(self.mass, self.r))

    def mutual_information(self) -> float:
        """I(X;Y) of the discretized channel, in bits."""
        from cellquant.measure import joint_mutual_information

        return joint_mutual_information(self.mass * self.r, self.mass * (1.0 - self.r))


def default_range(channel: ChannelSpec) -> tuple[float, float]:
    """Union of both densities' envelopes, clipped to the common support."""
    lo = min(channel.phi1.envelope[0], channel.phi2.envelope[0])
    hi = max(channel.phi1.envelope[1], channel.phi2.envelope[1])
    slo, shi = channel.support
    return max(lo, slo), min(hi, shi)


def discretize(channel: ChannelSpec, y_min: float, y_max: float, m_atoms: int) -> PosteriorGrid:
    """Midpoint-rule discretization of ``[y_min, y_max]`` into ``m_atoms`` cells.

    Atom masses are proportional to ``mu(y) * dy`` with
    ``mu = p1*phi1 + p2*phi2`` and renormalised to sum to one.  Atoms where
    ``mu`` vanishes are dropped.
    """
    if not y_min < y_max:
        raise DomainError("y_min must be < y_max")
    if int(m_atoms) != m_atoms or m_atoms < 2:
        raise DomainError("m_atoms must be an integer >= 2")
    m_atoms = int(m_atoms)
    slo, shi = channel.support
    if y_min < slo or y_max > shi:
        raise DomainError(f"[{y_min}, {y_max}] exceeds the evaluable support [{slo}, {shi}]")
    dy = (y_max - y_min) / m_atoms
    ys = y_min + (np.arange(m_atoms) + 0.5) * dy
    w1 = channel.prior.p1 * _density_array(channel.phi1, ys)
    w2 = channel.prior.p2 * _density_array(channel.phi2, ys)
    mu = w1 + w2
    keep = mu > 0
    if not np.any(keep):
        raise EmptyGridError("every atom has zero mass on this range")
    r = np.zeros_like(mu)
    r[keep] = w1[keep] / mu[keep]
    # r is clipped because w1/mu can exceed 1 by one ulp
    return PosteriorGrid.from_atoms(np.clip(r, 0.0, 1.0), mu * dy, ys)
