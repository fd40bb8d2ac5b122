"""Hazard models, technical bases, and survivorship discounting.

Mortality follows a Makeham law ``alpha + beta * c**age``, or is a
proportional scaling of another model.  Lapse hazards are zero, constant,
or proportional scalings.  A :class:`Basis` bundles a constant force of
interest with one mortality and one lapse model.

All hazard integrals in the engine are accumulated by the trapezoid rule
on the same fixed uniform duration grid that the ODE solver uses, so the
discounting path and the policy-value path never disagree about quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import DomainError, ValidationError

#: Hard ceiling for hazard evaluation; guards Makeham overflow at high ages.
MAX_AGE = 120.0

#: Uniform grid step in years shared by the ODE solver and all quadrature.
DEFAULT_STEP = 1.0 / 240.0

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class MortalityModel:
    """Mortality hazard: a Makeham law or a scaled copy of another model.

    The ``makeham`` kind evaluates ``alpha + beta * c**age``; the ``scaled``
    kind evaluates ``factor`` times its base model, exactly.
    """

    kind: str
    alpha: float = 0.0
    beta: float = 0.0
    c: float = 1.0
    base: Optional["MortalityModel"] = None
    factor: float = 1.0

    def __post_init__(self) -> None:
        if self.kind == "makeham":
            params = (self.alpha, self.beta, self.c)
            if not all(math.isfinite(p) for p in params):
                raise ValidationError("Makeham parameters must be finite")
            if self.c <= 0.0:
                raise ValidationError("Makeham age base c must be positive")
            at_zero = self.alpha + self.beta
            at_max = self.alpha + self.beta * self.c**MAX_AGE
            if not (math.isfinite(at_max) and min(at_zero, at_max) >= 0.0):
                raise ValidationError(
                    f"Makeham hazard must be finite and nonnegative on [0, {MAX_AGE:g}]"
                )
        elif self.kind == "scaled":
            if self.base is None:
                raise ValidationError("scaled mortality requires a base model")
            if not (math.isfinite(self.factor) and self.factor >= 0.0):
                raise ValidationError("mortality scaling factor must be >= 0")
        else:
            raise ValidationError(f"unknown mortality model kind {self.kind!r}")

    @classmethod
    def makeham(cls, alpha: float, beta: float, c: float) -> "MortalityModel":
        return cls(kind="makeham", alpha=alpha, beta=beta, c=c)

    @classmethod
    def scaled(cls, base: "MortalityModel", factor: float) -> "MortalityModel":
        return cls(kind="scaled", base=base, factor=factor)

    @classmethod
    def constant(cls, rate: float) -> "MortalityModel":
        """Age-independent hazard, as a degenerate Makeham law."""
        return cls(kind="makeham", alpha=rate, beta=0.0, c=1.0)


#: Danish G82 male first-order mortality basis.
G82M = MortalityModel.makeham(alpha=5.0e-4, beta=7.5858e-5, c=10.0**0.038)


@dataclass(frozen=True)
class LapseModel:
    """Lapse hazard by policy duration: zero, constant, or scaled."""

    kind: str
    rate: float = 0.0
    base: Optional["LapseModel"] = None
    factor: float = 1.0

    def __post_init__(self) -> None:
        if self.kind == "zero":
            pass
        elif self.kind == "constant":
            if not (math.isfinite(self.rate) and self.rate >= 0.0):
                raise ValidationError("constant lapse rate must be >= 0")
        elif self.kind == "scaled":
            if self.base is None:
                raise ValidationError("scaled lapse model requires a base model")
            if not (math.isfinite(self.factor) and self.factor >= 0.0):
                raise ValidationError("lapse scaling factor must be >= 0")
        else:
            raise ValidationError(f"unknown lapse model kind {self.kind!r}")

    @classmethod
    def zero(cls) -> "LapseModel":
        return cls(kind="zero")

    @classmethod
    def constant(cls, rate: float) -> "LapseModel":
        return cls(kind="constant", rate=rate)

    @classmethod
    def scaled(cls, base: "LapseModel", factor: float) -> "LapseModel":
        return cls(kind="scaled", base=base, factor=factor)


@dataclass(frozen=True)
class Basis:
    """Constant force of interest plus mortality and lapse hazard models."""

    delta: float
    mortality: MortalityModel
    lapse: LapseModel

    def __post_init__(self) -> None:
        # delta = 0 is admitted for degenerate closed-form test cases.
        if not (math.isfinite(self.delta) and self.delta >= 0.0):
            raise ValidationError("force of interest must be finite and >= 0")

    def without_lapses(self) -> "Basis":
        return Basis(self.delta, self.mortality, LapseModel.zero())


def _eval_mortality(model: MortalityModel, age: np.ndarray) -> np.ndarray:
    if model.kind == "makeham":
        return model.alpha + model.beta * model.c**age
    return model.factor * _eval_mortality(model.base, age)


def mortality_hazard(model: MortalityModel, age: ArrayLike) -> ArrayLike:
    """Hazard rate per year at ``age`` (scalar or array).

    Raises:
        DomainError: if any age lies outside ``[0, MAX_AGE]``.
    """
    arr = np.asarray(age, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > MAX_AGE):
        raise DomainError(f"age outside [0, {MAX_AGE:g}]")
    out = _eval_mortality(model, arr)
    return float(out) if np.ndim(age) == 0 else out


def _eval_lapse(model: LapseModel, t: np.ndarray) -> np.ndarray:
    if model.kind == "zero":
        return np.zeros_like(t)
    if model.kind == "constant":
        return np.full_like(t, model.rate)
    return model.factor * _eval_lapse(model.base, t)


def lapse_hazard(model: LapseModel, t: ArrayLike) -> ArrayLike:
    """Lapse hazard rate per year at duration ``t`` (scalar or array)."""
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0.0):
        raise DomainError("duration must be >= 0")
    out = _eval_lapse(model, arr)
    return float(out) if np.ndim(t) == 0 else out


def constant_lapse_rate(model: LapseModel) -> Optional[float]:
    """The model's duration-independent rate, or None if it has none."""
    if model.kind == "zero":
        return 0.0
    if model.kind == "constant":
        return model.rate
    base = constant_lapse_rate(model.base)
    return None if base is None else model.factor * base


def duration_grid(term: float, step: float = DEFAULT_STEP) -> np.ndarray:
    """Uniform grid ``0 = t_0 < ... < t_N = term`` with spacing ``step``."""
    if term <= 0.0:
        raise ValidationError("term must be positive")
    if step <= 0.0:
        raise ValidationError("grid step must be positive")
    n = int(round(term / step))
    if n < 1 or abs(n * step - term) > 1e-9 * max(1.0, term):
        raise ValidationError(f"term {term!r} is not a whole number of steps of {step!r}")
    return np.linspace(0.0, term, n + 1)


def cumulative_trapezoid(values: np.ndarray, step: float) -> np.ndarray:
    """Running trapezoid integral of grid samples, starting at 0."""
    cells = 0.5 * step * (values[1:] + values[:-1])
    out = np.empty_like(values)
    out[0] = 0.0
    np.cumsum(cells, out=out[1:])
    return out


def hazard_curves(
    basis: Basis, grid: np.ndarray, entry_age: float = 0.0
) -> tuple[np.ndarray, np.ndarray]:
    """Mortality and lapse hazards sampled on a duration grid."""
    mu = mortality_hazard(basis.mortality, entry_age + grid)
    nu = lapse_hazard(basis.lapse, grid)
    return np.asarray(mu), np.asarray(nu)


def in_force_curve(basis: Basis, grid: np.ndarray, entry_age: float = 0.0) -> np.ndarray:
    """Probability of remaining in force (neither dead nor lapsed) by duration."""
    mu, nu = hazard_curves(basis, grid, entry_age)
    step = float(grid[1] - grid[0])
    return np.exp(-cumulative_trapezoid(mu + nu, step))


def survivorship_discount_curve(
    basis: Basis, grid: np.ndarray, entry_age: float = 0.0
) -> np.ndarray:
    """Discount factor allowing for survivorship, sampled on a grid.

    Equals the pure-interest discount ``exp(-delta * t)`` times the
    in-force probability at each grid point.
    """
    return np.exp(-basis.delta * grid) * in_force_curve(basis, grid, entry_age)


def survivorship_discount(
    basis: Basis, t: float, entry_age: float = 0.0, step: float = DEFAULT_STEP
) -> float:
    """Discount factor at duration ``t`` allowing for survivorship.

    ``exp(-integral of (delta + mu + nu) over [0, t])``, with the hazard
    integral accumulated by the trapezoid rule at spacing ``step`` (plus a
    partial final cell when ``t`` is not grid aligned).

    Raises:
        DomainError: if ``t`` is negative.
    """
    if t < 0.0:
        raise DomainError("duration must be >= 0")
    if t == 0.0:
        return 1.0
    whole = int(math.floor(t / step + 1e-12))
    nodes = np.arange(whole + 1, dtype=float) * step
    if t - nodes[-1] > 1e-12 * max(1.0, t):
        nodes = np.append(nodes, t)
    mu, nu = hazard_curves(basis, nodes, entry_age)
    hazard_integral = float(np.trapezoid(mu + nu, nodes))
    return math.exp(-basis.delta * t - hazard_integral)
