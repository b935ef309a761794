"""Single-layer Wyner-Ziv source coding against a fading side-information gain.

A rate-R layer is designed for one target side-information state gamma_bar:
decoders whose realized gain falls below the target fall back to estimating
from side information alone, those at or above it decode the layer. For a
continuous quasiconcave gain density the optimal layer targets the left
endpoint of a density super-level set, which turns the optimality condition
into a one-dimensional root-finding problem on the rising edge of the pdf.

Discrete side-information laws need a multi-layer allocation and are out of
scope here; only :class:`~fadewz.fading.GammaLaw` gains are accepted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fading import GammaLaw, truncation_bound
from .numerics import (
    DEFAULT_TOL,
    DomainError,
    Tolerances,
    exp_integral_e1_scaled,
    find_root_bisect,
    integrate_adaptive,
)

__all__ = [
    "TargetState",
    "ed_q_given_target",
    "target_residual",
    "solve_target",
    "ed_q_opt",
    "ed_rayleigh_closed",
]


@dataclass(frozen=True)
class TargetState:
    """Solved target side-information state for a single-layer code.

    ``alpha_star`` is the density level whose super-level set starts at
    ``gamma_bar`` (it is +inf when a shape < 1 law is clamped to 0).
    ``at_boundary`` marks the clamped case, where the optimality residual
    at 0 is already <= 0.
    """

    gamma_bar: float
    alpha_star: float
    at_boundary: bool


def _left_singular_shape(law: GammaLaw, lower: float) -> float | None:
    return law.shape if (law.shape < 1.0 and lower == 0.0) else None


def ed_q_given_target(law: GammaLaw, rate: float, gamma_bar: float,
                      tol: Tolerances = DEFAULT_TOL) -> float:
    """Expected distortion of a rate-``rate`` layer targeting ``gamma_bar``.

    Gains below the target contribute 1/(1+gamma) (side information only);
    gains above it contribute 1/((gamma_bar+1)*2^(2*rate) + gamma - gamma_bar).
    The truncated-tail remainder is below ``tol.tail_mass`` since both
    integrands are bounded by the density.
    """
    if not rate >= 0.0:
        raise DomainError(f"rate must be >= 0, got {rate!r}")
    if not gamma_bar >= 0.0:
        raise DomainError(f"gamma_bar must be >= 0, got {gamma_bar!r}")
    denom_offset = (gamma_bar + 1.0) * 4.0 ** rate - gamma_bar
    cutoff = truncation_bound(law, tol.tail_mass, tol)

    # Integration never runs past the tail cutoff: beyond it there is at
    # most tail_mass of probability and both integrands are <= pdf.
    total = 0.0
    if gamma_bar > 0.0:
        total += integrate_adaptive(
            lambda g: law.pdf(g) / (1.0 + g), 0.0, min(gamma_bar, cutoff), tol,
            singular_left_shape=_left_singular_shape(law, 0.0))
    if gamma_bar < cutoff:
        total += integrate_adaptive(
            lambda g: law.pdf(g) / (denom_offset + g), gamma_bar, cutoff, tol,
            singular_left_shape=_left_singular_shape(law, gamma_bar))
    return total


def target_residual(law: GammaLaw, rate: float, gamma_bar: float,
                    tol: Tolerances = DEFAULT_TOL) -> float:
    """Stationarity residual of the target-state equation at ``gamma_bar``.

    With alpha* = pdf(gamma_bar) this is
    int_{gamma_bar}^inf (pdf(g) - alpha*) / ((1+gamma_bar)*2^(2*rate) + g - gamma_bar)^2 dg;
    the expected distortion is decreasing in the target exactly where the
    residual is positive, so a zero marks the interior optimum. The
    constant-level part of the integrand is integrated analytically out to
    infinity; the density part is truncated at negligible tail mass.
    """
    if not gamma_bar >= 0.0:
        raise DomainError(f"gamma_bar must be >= 0, got {gamma_bar!r}")
    alpha = law.pdf(gamma_bar)
    if math.isinf(alpha):
        # Diverging density at 0 (shape < 1): every level set starts at 0.
        return -math.inf
    scale = (gamma_bar + 1.0) * 4.0 ** rate
    cutoff = truncation_bound(law, tol.tail_mass, tol)
    if gamma_bar >= cutoff:
        # Past the tail cutoff the density part is below tail_mass/scale^2.
        return -alpha / scale
    density_part = integrate_adaptive(
        lambda g: law.pdf(g) / (scale + g - gamma_bar) ** 2,
        gamma_bar, cutoff, tol,
        singular_left_shape=_left_singular_shape(law, gamma_bar))
    return density_part - alpha / scale


@lru_cache(maxsize=None)
def solve_target(law: GammaLaw, rate: float, tol: Tolerances = DEFAULT_TOL) -> TargetState:
    """Locate the optimal target state for a rate-``rate`` layer.

    If the residual at 0 is already <= 0 the optimum is clamped to the
    boundary (all monotone-decreasing laws, i.e. shape <= 1, land here for
    every rate). Otherwise the pdf has a rising edge and the residual
    changes sign on (0, mode), where target and level are in bijection, so
    plain bisection applies.
    """
    if not rate >= 0.0:
        raise DomainError(f"rate must be >= 0, got {rate!r}")
    boundary = target_residual(law, rate, 0.0, tol)
    if boundary <= 0.0:
        return TargetState(0.0, law.pdf(0.0), True)
    mode = law.mode
    if not mode > 0.0:  # pragma: no cover - positive residual forces shape > 1
        raise DomainError("positive residual at 0 for a law without a rising edge")
    residual_at_mode = target_residual(law, rate, mode, tol)
    if residual_at_mode > 0.0:
        raise DomainError(
            "no sign change of the target residual on (0, mode): "
            f"residual(0)={boundary!r}, residual(mode)={residual_at_mode!r} "
            f"for law={law!r}, rate={rate!r}")
    gamma_bar = find_root_bisect(
        lambda g: target_residual(law, rate, g, tol),
        0.0, mode, tol, width=tol.root_tol * (1.0 + mode))
    return TargetState(gamma_bar, law.pdf(gamma_bar), False)


@lru_cache(maxsize=None)
def ed_q_opt(law: GammaLaw, rate: float, tol: Tolerances = DEFAULT_TOL) -> float:
    """Minimum single-layer expected distortion at rate ``rate``."""
    state = solve_target(law, rate, tol)
    return ed_q_given_target(law, rate, state.gamma_bar, tol)


def ed_rayleigh_closed(mean_gain: float, rate: float) -> float:
    """Closed form of the optimal distortion for an exponential gain law.

    Equals (1/m) * e^x * E1(x) at x = 2^(2*rate)/m, evaluated through the
    jointly computed e^x E1(x) so large x cannot overflow.
    """
    if not mean_gain > 0.0:
        raise DomainError(f"mean_gain must be positive, got {mean_gain!r}")
    if not rate >= 0.0:
        raise DomainError(f"rate must be >= 0, got {rate!r}")
    x = 4.0 ** rate / mean_gain
    return exp_integral_e1_scaled(x) / mean_gain
