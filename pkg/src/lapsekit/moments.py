"""Moments of the per-policy loss present value, and a Monte Carlo oracle.

The loss of an in-force policy is the present value of future outgo (death,
lapse, and maturity benefits) minus future premium income, per unit sum
insured.  Conditional moments m_q(t) of that random variable satisfy the
backward ODE

    d m_q / dt = (q delta + mu + nu) m_q + q p(t) m_{q-1}
                 - mu b_death**q - nu b_lapse(t)**q,
    m_q(n) = b_maturity**q,   m_0 = 1,

where p(t) is the premium rate per unit sum insured.  For q = 1 this is the
policy-value equation, so the first moment at issue vanishes exactly when
the charged premium is actuarially fair for the class.

Reported numbers come from the ODEs; ``simulate_policy`` provides an
independent pathwise check by competing transition times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .contracts import Contract
from .errors import ValidationError
from .hazards import (
    DEFAULT_STEP,
    Basis,
    cumulative_trapezoid,
    duration_grid,
    hazard_curves,
)
from .thiele import PremiumLike, _backward_rk4, _samples


@dataclass(frozen=True)
class LossMoments:
    """First two raw moments of the loss per unit sum insured for one class."""

    m1: float
    m2: float
    variance: float
    class_id: str = ""


@dataclass(frozen=True)
class MixtureMoments:
    """Loss moments of an individual drawn at random from weighted classes."""

    mean: float
    variance: float
    weights: tuple[float, ...]
    sums_insured: tuple[float, ...]


@dataclass(frozen=True)
class SimulationMoments:
    """Empirical loss moments with standard errors for the mean and the sd."""

    mean: float
    variance: float
    std_error_mean: float
    std_error_sd: float
    paths: int


def _unit_cashflows(
    contract: Contract,
    charged_premium: PremiumLike,
    surrender_path: Optional[Callable],
    t: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Premium rate, lapse benefit, and maturity benefit per unit sum insured."""
    scale = contract.sum_insured
    if scale <= 0.0:
        raise ValidationError("per-unit loss moments require a positive sum insured")
    premium = _samples(charged_premium, t) / scale
    if contract.surrender_rule.kind == "zero":
        lapse_benefit = np.zeros_like(t)
    else:
        if surrender_path is None:
            raise ValidationError(
                "proportional surrender values need an explicit policy-value path"
            )
        lapse_benefit = np.asarray(surrender_path(t), dtype=float) / scale
    return premium, lapse_benefit, contract.maturity / scale


def unit_loss_moments(
    contract: Contract,
    charged_premium: PremiumLike,
    class_basis: Basis,
    order: int = 2,
    *,
    surrender_path: Optional[Callable] = None,
    step: float = DEFAULT_STEP,
    class_id: str = "",
) -> LossMoments:
    """Moments at issue of the loss per unit sum insured for one class.

    The class basis carries the hazards actually experienced by the class;
    the charged premium is whatever the insurer collects, fair or not.  For
    surrender designs paying a proportion of the policy value, pass the
    policy-value path on the pricing basis as ``surrender_path``.
    """
    if order not in (1, 2):
        raise ValidationError("moment order must be 1 or 2")
    # First moment is solved at half the step so the second-moment solve has
    # accurate midpoint samples of m1.
    half = 0.5 * step
    fine = duration_grid(contract.term, half)
    x = contract.entry_age
    mu_f, nu_f = hazard_curves(class_basis, fine, x)
    prem_f, lapse_f, maturity = _unit_cashflows(contract, charged_premium, surrender_path, fine)

    a1 = class_basis.delta + mu_f + nu_f
    b1 = prem_f - mu_f - nu_f * lapse_f
    fine_mid = fine[:-1] + 0.5 * half
    mu_fm, nu_fm = hazard_curves(class_basis, fine_mid, x)
    prem_fm, lapse_fm, _ = _unit_cashflows(contract, charged_premium, surrender_path, fine_mid)
    a1_mid = class_basis.delta + mu_fm + nu_fm
    b1_mid = prem_fm - mu_fm - nu_fm * lapse_fm
    m1_path = _backward_rk4(a1, a1_mid, b1, b1_mid, half, maturity, fine)

    m1 = float(m1_path[0])
    if order == 1:
        return LossMoments(m1=m1, m2=math.nan, variance=math.nan, class_id=class_id)

    grid = fine[::2]
    a2 = 2.0 * class_basis.delta + mu_f + nu_f
    b2 = 2.0 * prem_f * m1_path - mu_f - nu_f * lapse_f**2
    m2_path = _backward_rk4(
        a2[::2], a2[1::2], b2[::2], b2[1::2], step, maturity**2, grid
    )
    m2 = float(m2_path[0])
    return LossMoments(m1=m1, m2=m2, variance=m2 - m1 * m1, class_id=class_id)


def mixture_variance(
    classes: Sequence[tuple[float, float, LossMoments]],
) -> MixtureMoments:
    """Loss mean and variance for an individual drawn at random.

    Each entry is ``(weight, sum_insured, per-unit moments)``.  Membership
    indicators of disjoint classes are idempotent and mutually exclusive, so
    the mixed raw moments are the weighted sums of the class raw moments
    scaled by the class sums insured.
    """
    if not classes:
        raise ValidationError("mixture needs at least one class")
    weights = np.array([w for w, _, _ in classes], dtype=float)
    sums = np.array([s for _, s, _ in classes], dtype=float)
    if np.any(weights < 0.0):
        raise ValidationError("mixture weights must be nonnegative")
    if abs(weights.sum() - 1.0) > 1e-12:
        raise ValidationError("mixture weights must sum to 1")
    m1 = np.array([m.m1 for _, _, m in classes])
    m2 = np.array([m.m2 for _, _, m in classes])
    mean = float(np.sum(weights * sums * m1))
    variance = float(np.sum(weights * sums**2 * m2) - mean**2)
    return MixtureMoments(
        mean=mean, variance=variance, weights=tuple(weights), sums_insured=tuple(sums)
    )


def simulate_policy(
    contract: Contract,
    charged_premium: PremiumLike,
    class_basis: Basis,
    path_count: int,
    seed: int,
    *,
    surrender_path: Optional[Callable] = None,
    step: float = DEFAULT_STEP,
    block_size: int = 1 << 16,
) -> SimulationMoments:
    """Monte Carlo loss moments per unit sum insured.

    The first exit time from the in-force state is drawn by inverting the
    integrated total hazard on the grid; the exit is then attributed to
    death or lapse by the hazard ratio at that instant.  Paths are generated
    in fixed-size blocks with seeds derived from ``(seed, block index)``, so
    results are reproducible for a given seed and block size.
    """
    if path_count < 1:
        raise ValidationError("path count must be >= 1")
    grid = duration_grid(contract.term, step)
    x = contract.entry_age
    mu, nu = hazard_curves(class_basis, grid, x)
    total = mu + nu
    integrated = cumulative_trapezoid(total, step)
    with np.errstate(invalid="ignore"):
        death_share = np.where(total > 0.0, mu / np.where(total > 0.0, total, 1.0), 0.0)

    prem, lapse_benefit, maturity = _unit_cashflows(contract, charged_premium, surrender_path, grid)
    discount = np.exp(-class_basis.delta * grid)
    premium_pv = cumulative_trapezoid(prem * discount, step)

    n = 0
    s1 = s2 = s3 = s4 = 0.0
    block = 0
    while n < path_count:
        m = min(block_size, path_count - n)
        rng = np.random.default_rng([seed, block])
        exits = rng.standard_exponential(m)
        uniforms = rng.random(m)

        losses = np.empty(m)
        survived = exits >= integrated[-1]
        losses[survived] = discount[-1] * maturity - premium_pv[-1]

        lapsed_or_died = ~survived
        e = exits[lapsed_or_died]
        idx = np.searchsorted(integrated, e, side="right") - 1
        idx = np.clip(idx, 0, len(grid) - 2)
        cell = integrated[idx + 1] - integrated[idx]
        frac = np.where(cell > 0.0, (e - integrated[idx]) / np.where(cell > 0.0, cell, 1.0), 0.0)
        t_exit = grid[idx] + frac * step
        share = death_share[idx] + frac * (death_share[idx + 1] - death_share[idx])
        is_death = uniforms[lapsed_or_died] < share
        benefit = np.where(
            is_death, 1.0, np.interp(t_exit, grid, lapse_benefit)
        )
        pv = np.exp(-class_basis.delta * t_exit) * benefit - np.interp(t_exit, grid, premium_pv)
        losses[lapsed_or_died] = pv

        n += m
        s1 += losses.sum()
        s2 += (losses**2).sum()
        s3 += (losses**3).sum()
        s4 += (losses**4).sum()
        block += 1

    mean = s1 / n
    central2 = max(s2 / n - mean**2, 0.0)
    variance = central2 * n / (n - 1) if n > 1 else 0.0
    central4 = max(
        (s4 - 4.0 * mean * s3 + 6.0 * mean**2 * s2 - 4.0 * mean**3 * s1) / n + mean**4, 0.0
    )
    std_error_mean = math.sqrt(variance / n)
    sd = math.sqrt(variance)
    if sd > 0.0:
        var_of_var = max(central4 - central2**2, 0.0) / n
        std_error_sd = math.sqrt(var_of_var) / (2.0 * sd)
    else:
        std_error_sd = 0.0
    return SimulationMoments(
        mean=mean,
        variance=variance,
        std_error_mean=std_error_mean,
        std_error_sd=std_error_sd,
        paths=n,
    )
