"""Transmission schemes: conditional distortions, outage sets, expected
distortion and free-parameter optimization.

Four schemes are covered. Uncoded sends the source samples directly and
never declares outage. SSCC concatenates a binned single-layer source code
with a channel code and fails if either stage fails. JDS drops the binning
and decodes the quantization codeword jointly from channel output and side
information, so a good side-information draw can rescue a bad channel draw.
S-HDA superposes a scaled quantization-error signal on the raw source;
all-analog power (P_d = 0) reduces it to uncoded transmission and
all-digital power (P_d = 1) to plain HDA.

Conventions, fixed so property tests are deterministic: the rate slack of
the achievability arguments is taken to 0 everywhere, and equality in an
outage predicate counts as outage (a measure-zero event under continuous
fading either way).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from .bounds import mean_inverse_gain
from .fading import SystemConfig, truncation_bound
from .numerics import (
    DEFAULT_TOL,
    DomainError,
    Tolerances,
    integrate_adaptive,
    minimize_box,
)
from .wyner_ziv import ed_rayleigh_closed, solve_target

__all__ = [
    "Uncoded",
    "SSCC",
    "JDS",
    "SHDA",
    "SchemeParams",
    "ConditionalOutcome",
    "uncoded_conditional",
    "sscc_conditional",
    "jds_conditional",
    "shda_conditional",
    "conditional_distortion",
    "expected_distortion",
    "optimize_scheme",
    "sscc_binning_rate",
    "uncoded_ed_exponential_side",
    "SCHEME_KINDS",
]

SCHEME_KINDS = ("uncoded", "sscc", "jds", "hda", "shda")


@dataclass(frozen=True)
class Uncoded:
    """Analog transmission; no free parameters."""

    label = "uncoded"


@dataclass(frozen=True)
class SSCC:
    """Separate source/channel coding with channel rate rc and binning rate rs."""

    rc: float
    rs: float = 0.0

    label = "sscc"

    def __post_init__(self):
        if not (self.rc > 0.0 and math.isfinite(self.rc)):
            raise DomainError(f"SSCC channel rate must be positive, got {self.rc!r}")
        if not (self.rs >= 0.0 and math.isfinite(self.rs)):
            raise DomainError(f"SSCC binning rate must be >= 0, got {self.rs!r}")

    @property
    def total_rate(self) -> float:
        return self.rc + self.rs


@dataclass(frozen=True)
class JDS:
    """Joint decoding at quantization rate rj."""

    rj: float

    label = "jds"

    def __post_init__(self):
        if not (self.rj > 0.0 and math.isfinite(self.rj)):
            raise DomainError(f"JDS rate must be positive, got {self.rj!r}")


@dataclass(frozen=True)
class SHDA:
    """Superposed hybrid digital-analog with digital power pd and test-channel gain eta."""

    pd: float
    eta: float

    label = "shda"

    def __post_init__(self):
        if not (0.0 <= self.pd <= 1.0):
            raise DomainError(f"digital power fraction must lie in [0, 1], got {self.pd!r}")
        if not (self.eta >= 0.0 and math.isfinite(self.eta)):
            raise DomainError(f"eta must be >= 0, got {self.eta!r}")

    @property
    def pa(self) -> float:
        """Power left for the uncoded layer."""
        return 1.0 - self.pd

    @property
    def rate_h(self) -> float:
        """Quantization rate implied by eta^2 = pd * (2^(2*rate) - 1)."""
        if self.pd == 0.0:
            return math.inf if self.eta > 0.0 else 0.0
        return 0.5 * math.log2(1.0 + self.eta * self.eta / self.pd)


SchemeParams = Union[Uncoded, SSCC, JDS, SHDA]


@dataclass(frozen=True)
class ConditionalOutcome:
    """Decode/outage flag and the distortion achieved at fixed states."""

    in_outage: bool
    distortion: float


def _channel_rate(h):
    return 0.5 * np.log2(1.0 + h)


def _wz_rate(total_rate, gamma):
    """Rate needed to decode a rate-``total_rate`` quantizer given side gain."""
    return 0.5 * np.log2(1.0 + (4.0 ** total_rate - 1.0) / (gamma + 1.0))


def _eval_uncoded(h, gamma):
    outage = np.zeros(np.broadcast(h, gamma).shape, dtype=bool)
    return outage, 1.0 / (1.0 + h + gamma)


def _eval_sscc(h, gamma, rc, rs):
    total = rc + rs
    outage = (rc >= _channel_rate(h)) | (rc <= _wz_rate(total, gamma))
    dist = np.where(outage, 1.0 / (1.0 + gamma), 1.0 / (gamma + 4.0 ** total))
    return outage, dist


def _eval_jds(h, gamma, rj):
    outage = _wz_rate(rj, gamma) >= _channel_rate(h)
    dist = np.where(outage, 1.0 / (1.0 + gamma), 1.0 / (gamma + 4.0 ** rj))
    return outage, dist


def _eval_shda(h, gamma, pd, eta):
    if pd == 0.0:
        # Always-outage limit: the receiver sees only the analog layer, and
        # the outage estimator with pa = 1 is exactly the uncoded one.
        outage = np.ones(np.broadcast(h, gamma).shape, dtype=bool)
        return outage, 1.0 / (1.0 + h + gamma)
    pa = 1.0 - pd
    mismatch = (math.sqrt(pa) - eta) ** 2
    eta2 = eta * eta
    outage = pd * h * (1.0 + pd * gamma) <= pd * h * mismatch + eta2
    decode = pd / (eta2 + pd * (1.0 + gamma + h * mismatch))
    fallback = 1.0 / (1.0 + h * pa / (1.0 + h * pd) + gamma)
    return outage, np.where(outage, fallback, decode)


def _eval(params: SchemeParams, h, gamma):
    if isinstance(params, Uncoded):
        return _eval_uncoded(h, gamma)
    if isinstance(params, SSCC):
        return _eval_sscc(h, gamma, params.rc, params.rs)
    if isinstance(params, JDS):
        return _eval_jds(h, gamma, params.rj)
    if isinstance(params, SHDA):
        return _eval_shda(h, gamma, params.pd, params.eta)
    raise DomainError(f"unknown scheme parameters: {params!r}")


def conditional_distortion(params: SchemeParams, h, gamma):
    """Vectorized distortion at fixed states (h, gamma)."""
    return _eval(params, np.asarray(h, float), np.asarray(gamma, float))[1]


def _scalar_outcome(params: SchemeParams, h: float, gamma: float) -> ConditionalOutcome:
    if h < 0.0 or gamma < 0.0:
        raise DomainError("states must be nonnegative")
    outage, dist = _eval(params, np.float64(h), np.float64(gamma))
    return ConditionalOutcome(bool(outage), float(dist))


def uncoded_conditional(h: float, gamma: float) -> ConditionalOutcome:
    """MMSE distortion of direct transmission; never in outage."""
    return _scalar_outcome(Uncoded(), h, gamma)


def sscc_conditional(h: float, gamma: float, rc: float, rs: float) -> ConditionalOutcome:
    """SSCC outcome: outage if the channel code or the source stage fails."""
    return _scalar_outcome(SSCC(rc=rc, rs=rs), h, gamma)


def jds_conditional(h: float, gamma: float, rj: float) -> ConditionalOutcome:
    """Joint-decoding outcome: outage only if combined quality is too low."""
    return _scalar_outcome(JDS(rj=rj), h, gamma)


def shda_conditional(h: float, gamma: float, pd: float, eta: float) -> ConditionalOutcome:
    """Hybrid outcome with decode and outage MMSE estimators."""
    return _scalar_outcome(SHDA(pd=pd, eta=eta), h, gamma)


# ---------------------------------------------------------------------------
# Expected distortion
# ---------------------------------------------------------------------------

def _inner_tol(tol: Tolerances) -> Tolerances:
    # Inner quadratures run tighter than the outer one so their residual
    # noise stays below the outer error estimate.
    return replace(tol, quad_rel=max(tol.quad_rel / 30.0, 1e-13))


def _side_integral_columns(cfg: SystemConfig, lo, hi, offsets, tol: Tolerances):
    """Per-column integrals of pdf(g)/(offset + rho*g) for g in [lo, hi].

    Columns share one adaptive partition of the unit interval (each column
    is mapped affinely onto it), so a whole batch of outer nodes is handled
    with vectorized panel evaluations. Columns with an empty range give 0.
    """
    side = cfg.side_law
    rho = cfg.rho
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    width = np.maximum(hi - lo, 0.0)
    active = width > 0.0
    safe = np.where(active, width, 1.0)

    def integrand(u):
        g = lo[None, :] + safe[None, :] * u[:, None]
        return side.pdf(g) / (offsets[None, :] + rho * g)

    singular = side.shape if side.shape < 1.0 else None
    cols = integrate_adaptive(integrand, 0.0, 1.0, tol,
                              singular_left_shape=singular, min_panels=4)
    return np.where(active, width * np.asarray(cols), 0.0)


def _outer_channel_integral(cfg: SystemConfig, inner, tol: Tolerances) -> float:
    """Integrate channel_pdf(h0) * inner(h0-batch) over the truncated gain."""
    channel = cfg.channel_law
    top = truncation_bound(channel, tol.tail_mass, tol)

    def integrand(h0):
        return channel.pdf(h0) * inner(h0)

    singular = channel.shape if channel.shape < 1.0 else None
    return integrate_adaptive(integrand, 0.0, top, tol, singular_left_shape=singular)


def _ed_uncoded(cfg: SystemConfig) -> float:
    tol = cfg.tol
    inner_tol = _inner_tol(tol)
    gtop = truncation_bound(cfg.side_law, tol.tail_mass, tol)
    rho = cfg.rho

    def inner(h0):
        h = rho * h0
        return _side_integral_columns(
            cfg, np.zeros_like(h), np.full_like(h, gtop), 1.0 + h, inner_tol)

    return _outer_channel_integral(cfg, inner, tol)


def _ed_sscc(cfg: SystemConfig, rc: float, rs: float) -> float:
    # The channel predicate depends only on h and the source predicate only
    # on gamma, so the expectation factors into a channel outage weight and
    # two side-gain integrals split at the source outage threshold.
    tol = cfg.tol
    total = rc + rs
    side_gain = cfg.side_gain_law
    p_channel_outage = cfg.channel_gain_law.cdf(4.0 ** rc - 1.0)
    fallback = mean_inverse_gain(side_gain, tol)

    gamma_star = max((4.0 ** total - 1.0) / (4.0 ** rc - 1.0) - 1.0, 0.0)
    cutoff = truncation_bound(side_gain, tol.tail_mass, tol)
    singular = side_gain.shape if side_gain.shape < 1.0 else None

    # Both side-gain integrals stop at the tail cutoff; with integrands
    # bounded by the density the discarded mass is below tail_mass.
    source_outage = 0.0
    if gamma_star > 0.0:
        source_outage = integrate_adaptive(
            lambda g: side_gain.pdf(g) / (1.0 + g), 0.0, min(gamma_star, cutoff), tol,
            singular_left_shape=singular)
    decode = 0.0
    if gamma_star < cutoff:
        decode = integrate_adaptive(
            lambda g: side_gain.pdf(g) / (g + 4.0 ** total), gamma_star, cutoff, tol,
            singular_left_shape=singular if gamma_star <= 0.0 else None)
    return p_channel_outage * fallback + \
        (1.0 - p_channel_outage) * (source_outage + decode)


def _ed_jds(cfg: SystemConfig, rj: float) -> float:
    # Given the side gain, the conditional distortion takes one of two
    # values and the channel enters only through the outage probability, an
    # incomplete-gamma weight that is smooth in gamma; a single quadrature
    # over the side gain therefore suffices.
    tol = cfg.tol
    side = cfg.side_law
    channel_gain = cfg.channel_gain_law
    rho = cfg.rho
    threshold = 4.0 ** rj - 1.0
    top = truncation_bound(side, tol.tail_mass, tol)

    def integrand(g):
        gamma = rho * g
        p_out = channel_gain.cdf(threshold / (1.0 + gamma))
        value = p_out / (1.0 + gamma) + (1.0 - p_out) / (gamma + 4.0 ** rj)
        return side.pdf(g) * value

    singular = side.shape if side.shape < 1.0 else None
    return integrate_adaptive(integrand, 0.0, top, tol, singular_left_shape=singular)


def _ed_shda(cfg: SystemConfig, pd: float, eta: float) -> float:
    if pd == 0.0:
        return _ed_uncoded(cfg)
    tol = cfg.tol
    inner_tol = _inner_tol(tol)
    pa = 1.0 - pd
    mismatch = (math.sqrt(pa) - eta) ** 2
    eta2 = eta * eta
    rho = cfg.rho
    gtop = truncation_bound(cfg.side_law, tol.tail_mass, tol)

    def inner(h0):
        h = rho * h0
        # The outage predicate is monotone in gamma at fixed h, giving one
        # threshold that splits the inner integral; both halves go through
        # a single batched quadrature.
        gamma_star = (mismatch - 1.0) / pd + eta2 / (pd * pd * h)
        gstar = np.clip(gamma_star / rho, 0.0, gtop)
        analog_gain = h * pa / (1.0 + h * pd)
        decode_offset = eta2 / pd + 1.0 + h * mismatch
        parts = _side_integral_columns(
            cfg,
            np.concatenate([np.zeros_like(h), gstar]),
            np.concatenate([gstar, np.full_like(h, gtop)]),
            np.concatenate([1.0 + analog_gain, decode_offset]),
            inner_tol)
        half = h.size
        return parts[:half] + parts[half:]

    return _outer_channel_integral(cfg, inner, tol)


def expected_distortion(params: SchemeParams, cfg: SystemConfig) -> float:
    """Expected end-to-end distortion of a scheme over both fading states."""
    if isinstance(params, Uncoded):
        return _ed_uncoded(cfg)
    if isinstance(params, SSCC):
        return _ed_sscc(cfg, params.rc, params.rs)
    if isinstance(params, JDS):
        return _ed_jds(cfg, params.rj)
    if isinstance(params, SHDA):
        return _ed_shda(cfg, params.pd, params.eta)
    raise DomainError(f"unknown scheme parameters: {params!r}")


def uncoded_ed_exponential_side(cfg: SystemConfig) -> float:
    """Uncoded expected distortion via the exponential-side closed form.

    Requires ls = 1: the inner expectation over the side gain then has the
    scaled-exponential-integral form, leaving one quadrature over the
    channel gain.
    """
    if cfg.ls != 1.0:
        raise DomainError("closed form requires an exponential side-information gain (ls = 1)")
    tol = cfg.tol
    channel = cfg.channel_law
    rho = cfg.rho
    top = truncation_bound(channel, tol.tail_mass, tol)

    def integrand(h0):
        return channel.pdf(h0) * np.array(
            [ed_rayleigh_closed(rho, 0.5 * math.log2(1.0 + rho * g)) for g in h0])

    singular = channel.shape if channel.shape < 1.0 else None
    return integrate_adaptive(integrand, 0.0, top, tol, singular_left_shape=singular)


# ---------------------------------------------------------------------------
# Parameter optimization
# ---------------------------------------------------------------------------

def sscc_binning_rate(rc: float, gamma_bar: float) -> float:
    """Binning rate that matches the channel rate to the target state.

    For a fixed channel rate the best source layer makes the side-decoding
    rate at the target state equal to rc, giving
    rs = 0.5*log2(1 + (1+gamma_bar)(2^(2*rc) - 1)) - rc, floored at 0.
    Used to seed the SSCC search and as a consistency check.
    """
    if rc < 0.0 or gamma_bar < 0.0:
        raise DomainError("rc and gamma_bar must be nonnegative")
    return max(0.0, 0.5 * math.log2(1.0 + (1.0 + gamma_bar) * (4.0 ** rc - 1.0)) - rc)


def _relaxed(cfg: SystemConfig) -> SystemConfig:
    # Search-phase accuracy; the returned optimum is re-evaluated at full
    # tolerance afterwards.
    tol = cfg.tol
    return replace(cfg, tol=replace(tol, quad_rel=max(tol.quad_rel, 1e-6)))


def _rate_box(cfg: SystemConfig) -> tuple[float, float]:
    return 1e-3, max(4.0, 1.1 * math.log2(1.0 + cfg.rho))


def _optimize_sscc(cfg: SystemConfig, search: SystemConfig, extra_starts):
    lo, hi = _rate_box(cfg)
    side_gain = cfg.side_gain_law

    seeds = list(extra_starts)
    for rc in np.geomspace(max(lo, 0.05), hi, 17):
        # Conditioned on channel success the source stage sees an
        # error-free link at rate rc, so the matched binning rate uses the
        # target state solved at rc.
        gamma_bar = solve_target(side_gain, float(rc), search.tol).gamma_bar
        rs = sscc_binning_rate(float(rc), gamma_bar)
        if rs > lo:
            seeds.append((rc, rs))

    binned, binned_ed = minimize_box(
        lambda p: _ed_sscc(search, p[0], p[1]),
        [(lo, hi), (lo, hi)], cfg.tol, log_axes=[True, True], extra_starts=seeds)
    plain, plain_ed = minimize_box(
        lambda p: _ed_sscc(search, p[0], 0.0),
        [(lo, hi)], cfg.tol, log_axes=[True],
        extra_starts=[(s[0],) for s in seeds])
    if plain_ed <= binned_ed:
        return SSCC(rc=float(plain[0]), rs=0.0)
    return SSCC(rc=float(binned[0]), rs=float(binned[1]))


def optimize_scheme(kind: str, cfg: SystemConfig, extra_starts=()) -> tuple[SchemeParams, float]:
    """Minimize a scheme's expected distortion over its free parameters.

    The multistart grid/pattern search runs at a relaxed quadrature
    tolerance; the winning point is re-evaluated at the configured one.
    SSCC always races a no-binning (rs = 0) branch against the 2-D search,
    and the hybrid grid contains the pd = 0 and pd = 1 endpoints, so the
    uncoded and HDA reductions are always among the candidates.
    """
    kind = kind.lower()
    if kind not in SCHEME_KINDS:
        raise DomainError(f"unknown scheme kind {kind!r}; expected one of {SCHEME_KINDS}")
    if kind == "uncoded":
        params: SchemeParams = Uncoded()
        return params, expected_distortion(params, cfg)

    search = _relaxed(cfg)
    lo, hi = _rate_box(cfg)
    if kind == "jds":
        best, _ = minimize_box(
            lambda p: _ed_jds(search, p[0]),
            [(lo, hi)], cfg.tol, log_axes=[True], extra_starts=extra_starts)
        params = JDS(rj=float(best[0]))
    elif kind == "sscc":
        params = _optimize_sscc(cfg, search, extra_starts)
    else:
        eta2_lo = min(1e-4, cfg.rho ** -2)
        eta2_hi = max(1e4, cfg.rho ** 2)
        if kind == "hda":
            best, _ = minimize_box(
                lambda p: _ed_shda(search, 1.0, math.sqrt(p[0])),
                [(eta2_lo, eta2_hi)], cfg.tol, log_axes=[True],
                extra_starts=extra_starts)
            params = SHDA(pd=1.0, eta=math.sqrt(float(best[0])))
        else:
            best, _ = minimize_box(
                lambda p: _ed_shda(search, p[0], math.sqrt(p[1])),
                [(0.0, 1.0), (eta2_lo, eta2_hi)], cfg.tol,
                log_axes=[False, True], extra_starts=extra_starts)
            params = SHDA(pd=float(best[0]), eta=math.sqrt(float(best[1])))
    return params, expected_distortion(params, cfg)
