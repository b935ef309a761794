"""Gamma-law fading gains, the normalized-SNR system setup, and sampling.

A Nakagami-distributed amplitude gives a gamma-distributed power gain; the
shape parameter controls how deterministic the gain is. Laws are immutable
values. SNR enters as a change of measure (integrate over the normalized
gain g and use rho*g inside integrands) or, equivalently for gamma laws,
through ``GammaLaw.scaled``; the canonical normalized laws on a
:class:`SystemConfig` are never mutated.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .numerics import (
    DEFAULT_TOL,
    DomainError,
    Tolerances,
    find_root_bisect,
    gamma_inc_reg,
)

__all__ = [
    "GammaLaw",
    "SystemConfig",
    "make_normalized",
    "truncation_bound",
    "sample_gain",
    "make_stream",
    "snr_rate_function",
]


@dataclass(frozen=True)
class GammaLaw:
    """Gamma distribution with shape ``shape`` and scale ``scale``.

    pdf(x) = scale^-shape / Gamma(shape) * x^(shape-1) * exp(-x/scale).
    Mean shape*scale, variance shape*scale^2. The pdf is monotone
    decreasing iff shape <= 1 (diverging at 0 for shape < 1) and is
    quasiconcave for every shape.
    """

    shape: float
    scale: float

    def __post_init__(self):
        if not (self.shape > 0.0 and math.isfinite(self.shape)):
            raise DomainError(f"gamma shape must be positive, got {self.shape!r}")
        if not (self.scale > 0.0 and math.isfinite(self.scale)):
            raise DomainError(f"gamma scale must be positive, got {self.scale!r}")

    @property
    def mean(self) -> float:
        return self.shape * self.scale

    @property
    def variance(self) -> float:
        return self.shape * self.scale * self.scale

    @property
    def mode(self) -> float:
        """Density maximizer; 0 for shape <= 1."""
        return self.scale * (self.shape - 1.0) if self.shape > 1.0 else 0.0

    @cached_property
    def _log_norm(self) -> float:
        return self.shape * math.log(self.scale) + math.lgamma(self.shape)

    def pdf(self, x):
        """Density at ``x`` (scalar or array). +inf at 0 when shape < 1.

        Callers integrating across x = 0 with shape < 1 must use the
        declared-singularity quadrature path.
        """
        arr = np.asarray(x, dtype=float)
        if np.any(arr < 0.0):
            raise DomainError("gamma pdf requires x >= 0")
        # log(0) = -inf propagates to the correct limit (0 for shape > 1,
        # +inf for shape < 1); only shape == 1 leaves a nan to patch.
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = np.exp((self.shape - 1.0) * np.log(arr) - arr / self.scale - self._log_norm)
        if self.shape == 1.0:
            out = np.where(arr == 0.0, 1.0 / self.scale, out)
        return float(out) if arr.ndim == 0 else out

    def cdf(self, x):
        """P[G <= x], the regularized lower incomplete gamma at x/scale."""
        return gamma_inc_reg(self.shape, x / self.scale)

    def scaled(self, factor: float) -> "GammaLaw":
        """Law of factor*G — gamma again with the scale multiplied."""
        return GammaLaw(self.shape, self.scale * factor)


def make_normalized(shape: float) -> GammaLaw:
    """Gamma law with the given shape and unit mean (scale = 1/shape)."""
    if not shape > 0.0:
        raise DomainError(f"shape must be positive, got {shape!r}")
    return GammaLaw(shape, 1.0 / shape)


@dataclass(frozen=True)
class SystemConfig:
    """Channel/side-information shapes, average SNR and tolerances.

    Both fading gains are normalized to unit mean (scale fixed to 1/shape)
    so the channel and the side-information link share the average SNR
    ``rho`` regardless of their shapes.
    """

    lc: float
    ls: float
    rho: float
    tol: Tolerances = DEFAULT_TOL

    def __post_init__(self):
        for name in ("lc", "ls", "rho"):
            value = getattr(self, name)
            if not (value > 0.0 and math.isfinite(value)):
                raise DomainError(f"{name} must be strictly positive, got {value!r}")

    @cached_property
    def channel_law(self) -> GammaLaw:
        """Normalized channel gain law (unit mean)."""
        return make_normalized(self.lc)

    @cached_property
    def side_law(self) -> GammaLaw:
        """Normalized side-information gain law (unit mean)."""
        return make_normalized(self.ls)

    @cached_property
    def channel_gain_law(self) -> GammaLaw:
        """Law of the SNR-scaled channel gain rho * G_channel."""
        return self.channel_law.scaled(self.rho)

    @cached_property
    def side_gain_law(self) -> GammaLaw:
        """Law of the SNR-scaled side-information gain rho * G_side."""
        return self.side_law.scaled(self.rho)


@lru_cache(maxsize=None)
def truncation_bound(law: GammaLaw, tail_mass: float, tol: Tolerances = DEFAULT_TOL) -> float:
    """Smallest x with cdf(x) >= 1 - tail_mass, located by bisection."""
    if not (0.0 < tail_mass < 1.0):
        raise DomainError(f"tail_mass must lie in (0, 1), got {tail_mass!r}")
    target = 1.0 - tail_mass
    hi = law.mean + 10.0 * math.sqrt(law.variance) + 10.0 * law.scale
    for _ in range(200):
        if law.cdf(hi) >= target:
            break
        hi *= 2.0
    else:  # pragma: no cover - cdf -> 1 long before this
        raise DomainError("failed to bracket the requested tail")
    width = tol.root_tol * max(1.0, law.scale)
    return find_root_bisect(lambda x: law.cdf(x) - target, 0.0, hi, tol, width=width)


def make_stream(seed: int, *path) -> np.random.Generator:
    """Independent counter-based random stream for a labelled task.

    Streams are split from a root ``seed`` by a path of labels such as
    ("mc", scheme, snr_index, replicate); equal (seed, path) pairs always
    reproduce the same draws, and distinct paths give statistically
    independent Philox streams, so parallel sweeps stay reproducible.
    """
    spawn_key = tuple(zlib.crc32(repr(item).encode("utf-8")) for item in path)
    seq = np.random.SeedSequence(seed, spawn_key=spawn_key)
    return np.random.Generator(np.random.Philox(seq))


def sample_gain(law: GammaLaw, stream: np.random.Generator, size=None):
    """Draw from ``law`` using the supplied stream (scalar or ``size`` array)."""
    draw = stream.gamma(law.shape, law.scale, size=size)
    return float(draw) if size is None else draw


def snr_rate_function(shape: float, alpha: float) -> float:
    """High-SNR decay rate of the gain density under gain = rho^-alpha.

    Evaluates to shape*alpha for alpha >= 0 and +inf for alpha < 0 (gains
    above the mean scale are exponentially unlikely in rho).
    """
    if not shape > 0.0:
        raise DomainError(f"shape must be positive, got {shape!r}")
    return shape * alpha if alpha >= 0.0 else math.inf
