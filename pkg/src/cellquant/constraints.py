"""Separable output-distribution penalties and the trade-off objective.

A penalty is ``C(p_Z) = sum_i g_i(p_{z_i})``.  Each ``g_i`` is one of a few
small value objects; they know how to evaluate themselves and how to encode
themselves for the compiled DP kernel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from cellquant.errors import ConfigError, DomainError
from cellquant.measure import cell_masses, mutual_information_xz, total_distortion

__all__ = [
    "ZeroTerm",
    "EntropyTerm",
    "LinearTerm",
    "PowerTerm",
    "Term",
    "SeparableConstraint",
    "Objective",
    "eval_term",
    "assemble_objective",
    "term_from_dict",
    "entropy_bits",
]

# Kernel tags; must match the constants in _dpcore.pyx and _dp_python.py.
KIND_ZERO, KIND_ENTROPY, KIND_LINEAR, KIND_POWER = 0, 1, 2, 3


@dataclass(frozen=True)
class ZeroTerm:
    def __call__(self, p):
        return np.zeros_like(np.asarray(p, dtype=float)) if np.ndim(p) else 0.0

    def encode(self):
        return KIND_ZERO, 0.0, 0.0

    def to_dict(self):
        return {"name": "zero"}


@dataclass(frozen=True)
class EntropyTerm:
    """``g(p) = -lam * p * log2(p)`` with ``g(0) = 0``."""

    lam: float = 1.0

    def __call__(self, p):
        p = np.asarray(p, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(p > 0, -self.lam * p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
        return float(out) if out.ndim == 0 else out

    def encode(self):
        return KIND_ENTROPY, float(self.lam), 0.0

    def to_dict(self):
        return {"name": "entropy", "lambda": self.lam}


@dataclass(frozen=True)
class LinearTerm:
    w: float

    def __call__(self, p):
        out = self.w * np.asarray(p, dtype=float)
        return float(out) if out.ndim == 0 else out

    def encode(self):
        return KIND_LINEAR, float(self.w), 0.0

    def to_dict(self):
        return {"name": "linear", "w": self.w}


@dataclass(frozen=True)
class PowerTerm:
    """``g(p) = w * p**e``; ``e`` must be positive so that ``g(0) = 0``."""

    w: float
    e: float

    def __post_init__(self):
        if not self.e > 0:
            raise DomainError("power exponent must be > 0")

    def __call__(self, p):
        out = self.w * np.power(np.asarray(p, dtype=float), self.e)
        return float(out) if out.ndim == 0 else out

    def encode(self):
        return KIND_POWER, float(self.w), float(self.e)

    def to_dict(self):
        return {"name": "power", "w": self.w, "e": self.e}


Term = Union[ZeroTerm, EntropyTerm, LinearTerm, PowerTerm]


def eval_term(g: Term, p: float) -> float:
    """Evaluate one penalty term at a probability ``p`` in [0, 1]."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"probability {p!r} outside [0, 1]")
    return float(g(p))


@dataclass(frozen=True)
class SeparableConstraint:
    """Per-cell penalty functions.

    With ``shared=True`` a single term is broadcast to every cell, whatever
    the number of cells.
    """

    terms: tuple
    shared: bool = False

    @classmethod
    def zero(cls) -> "SeparableConstraint":
        return cls((ZeroTerm(),), shared=True)

    @classmethod
    def entropy(cls, lam: float = 1.0) -> "SeparableConstraint":
        return cls((EntropyTerm(lam),), shared=True)

    @classmethod
    def of(cls, terms: Sequence[Term]) -> "SeparableConstraint":
        return cls(tuple(terms))

    def terms_for(self, n_cells: int) -> tuple:
        if self.shared:
            if len(self.terms) != 1:
                raise ConfigError("constraint.terms", "a shared constraint takes exactly one term")
            return self.terms * n_cells
        if len(self.terms) != n_cells:
            raise ConfigError(
                "constraint.terms", f"{len(self.terms)} terms given for {n_cells} cells")
        return self.terms

    def value(self, masses, order: Sequence[int] | None = None) -> float:
        """C(p_Z) for cell masses; ``order[i]`` picks the term used by cell ``i``."""
        masses = np.clip(np.asarray(masses, dtype=float), 0.0, 1.0)
        terms = self.terms_for(masses.size)
        if order is not None:
            terms = tuple(terms[k] for k in order)
        return float(sum(float(g(p)) for g, p in zip(terms, masses)))

    def to_dict(self):
        if self.shared:
            return {"shared": self.terms[0].to_dict()}
        return {"terms": [t.to_dict() for t in self.terms]}


def term_from_dict(d: dict, where: str = "constraint") -> Term:
    """Build a term from ``{"name": ..., params}``."""
    if not isinstance(d, dict) or "name" not in d:
        raise ConfigError(f"{where}.name", "term must be an object with a 'name'")
    name = d["name"]
    try:
        if name == "zero":
            return ZeroTerm()
        if name == "entropy":
            return EntropyTerm(float(d.get("lambda", 1.0)))
        if name == "linear":
            return LinearTerm(float(d["w"]))
        if name == "power":
            return PowerTerm(float(d["w"]), float(d["e"]))
    except KeyError as exc:
        raise ConfigError(f"{where}.{exc.args[0]}", "missing parameter") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(where, str(exc)) from None
    raise ConfigError(f"{where}.name", f"unknown constraint {name!r}")


@dataclass(frozen=True)
class Objective:
    value: float
    distortion_form: float
    mi_xz: float
    constraint_value: float
    distortion: float


def assemble_objective(beta: float, grid, q, constraint: SeparableConstraint,
                       order: Sequence[int] | None = None) -> Objective:
    """Evaluate ``beta * I(X;Z) - C(p_Z)`` and its distortion form for ``q``.

    The two are tied by ``value = beta * I(X;Y) - distortion_form``.
    """
    a, b = cell_masses(grid, q)
    c_val = constraint.value(a + b, order)
    mi = mutual_information_xz(grid, q)
    dist = total_distortion(grid, q)
    return Objective(
        value=beta * mi - c_val,
        distortion_form=beta * dist + c_val,
        mi_xz=mi,
        constraint_value=c_val,
        distortion=dist,
    )


def entropy_bits(masses) -> float:
    """H(Z) in bits of a cell-mass vector."""
    p = np.asarray(masses, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p))) if p.size else 0.0

