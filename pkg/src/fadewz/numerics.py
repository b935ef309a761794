"""Special functions, adaptive quadrature, bisection and pattern search.

Every routine here is a pure function of its inputs; there is no shared
mutable state, so concurrent use is safe.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammainc

__all__ = [
    "Tolerances",
    "DEFAULT_TOL",
    "DomainError",
    "QuadratureError",
    "BracketError",
    "exp_integral_e1",
    "exp_integral_e1_scaled",
    "gamma_inc_reg",
    "integrate_adaptive",
    "find_root_bisect",
    "minimize_box",
]

_EULER_GAMMA = 0.57721566490153286061


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not converge within its panel budget.

    The best available estimate (possibly None) is attached as ``estimate``.
    """

    def __init__(self, message: str, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class BracketError(ValueError):
    """A root bracket does not enclose a sign change."""


@dataclass(frozen=True)
class Tolerances:
    """Numeric tolerances shared across the library.

    quad_rel   relative target for adaptive quadrature
    quad_abs   absolute floor for quadrature error (guards integrals near 0)
    root_tol   bracket width at which bisection stops
    opt_tol    pattern-search step (relative to the axis span) at convergence
    tail_mass  probability mass discarded when truncating a distribution tail
    """

    quad_rel: float = 1e-9
    quad_abs: float = 1e-30
    root_tol: float = 1e-10
    opt_tol: float = 1e-6
    tail_mass: float = 1e-10

    def __post_init__(self):
        for name in ("quad_rel", "quad_abs", "root_tol", "opt_tol", "tail_mass"):
            value = getattr(self, name)
            if not (value > 0.0) or not math.isfinite(value):
                raise DomainError(f"tolerance {name} must be strictly positive, got {value!r}")
        if not self.tail_mass < 1e-6:
            raise DomainError(f"tail_mass must be < 1e-6, got {self.tail_mass!r}")


DEFAULT_TOL = Tolerances()


# ---------------------------------------------------------------------------
# Exponential integral E1
# ---------------------------------------------------------------------------

def exp_integral_e1_scaled(x: float) -> float:
    """Return e^x * E1(x) for x > 0 without overflow at large x.

    Power series below x = 1, Lentz-evaluated continued fraction above.
    """
    if not x > 0.0:
        raise DomainError(f"exp_integral_e1 requires x > 0, got {x!r}")
    if x <= 1.0:
        # E1(x) = -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k * k!)
        total = 0.0
        power = 1.0  # x^k / k!
        for k in range(1, 64):
            power *= x / k
            term = power / k
            total += term if k % 2 == 1 else -term
            if term < 1e-18:
                break
        return math.exp(x) * (-_EULER_GAMMA - math.log(x) + total)
    # e^x E1(x) = 1 / (x + 1 - 1^2/(x + 3 - 2^2/(x + 5 - ...)))
    tiny = 1e-300
    f = tiny
    c = f
    d = 0.0
    for n in range(1, 500):
        a = 1.0 if n == 1 else -float((n - 1) * (n - 1))
        b = x + 2.0 * n - 1.0
        d = b + a * d
        if d == 0.0:
            d = tiny
        c = b + a / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return f


def exp_integral_e1(x: float) -> float:
    """Exponential integral E1(x) = int_x^inf t^-1 e^-t dt, x > 0.

    Underflows to 0.0 for x >~ 745; use :func:`exp_integral_e1_scaled` when
    the e^x E1(x) product is what is actually needed.
    """
    return math.exp(-x) * exp_integral_e1_scaled(x)


# ---------------------------------------------------------------------------
# Regularized lower incomplete gamma
# ---------------------------------------------------------------------------

def gamma_inc_reg(shape: float, x):
    """Regularized lower incomplete gamma P(shape, x); accepts array x."""
    if not shape > 0.0:
        raise DomainError(f"gamma_inc_reg requires shape > 0, got {shape!r}")
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0):
        raise DomainError("gamma_inc_reg requires x >= 0")
    out = gammainc(shape, arr)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


# ---------------------------------------------------------------------------
# Adaptive Gauss-Kronrod quadrature
# ---------------------------------------------------------------------------

# G7/K15 nodes and weights on [-1, 1] (nodes sorted ascending; the Gauss rule
# uses every second node).
_GK_X = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0, 0.207784955007898, 0.405845151377397,
    0.586087235467691, 0.741531185599394, 0.864864423359769,
    0.949107912342759, 0.991455371120813,
])
_WK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529,
])
_GAUSS_IDX = np.arange(1, 15, 2)
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870,
])


def _gk_panel(f, a: float, b: float):
    """One G7/K15 evaluation on [a, b]; returns (estimate, error).

    ``f`` maps a node vector (15,) to values of shape (15,) or (15, m);
    the returned estimate/error are scalars or (m,) accordingly.
    """
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    y = np.asarray(f(mid + half * _GK_X), dtype=float)
    k15 = half * (_WK @ y)
    g7 = half * (_WG @ y[_GAUSS_IDX])
    if not np.all(np.isfinite(k15)):
        raise QuadratureError(
            f"non-finite integrand value on panel [{a!r}, {b!r}] "
            "(undeclared singularity?)")
    return k15, np.abs(k15 - g7)


def integrate_adaptive(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: Tolerances = DEFAULT_TOL,
    *,
    singular_left_shape: float | None = None,
    min_panels: int = 8,
    max_panels: int = 4000,
):
    """Adaptively integrate ``f`` on [a, b] by Gauss-Kronrod bisection.

    ``f`` must accept a vector of nodes and may return either one value per
    node or a (nodes, m) block; in the latter case a length-m vector of
    integrals is returned and refinement is driven by the worst column.

    A caller-declared integrable singularity at the left endpoint of the
    form (x - a)^(L-1) is handled by the substitution x = a + u^(1/L),
    which makes the transformed integrand bounded (``singular_left_shape``
    is L). Raises :class:`QuadratureError`, carrying the partial estimate,
    if the panel budget is exhausted before the target is met.
    """
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise DomainError(f"integration interval must satisfy a < b, got [{a!r}, {b!r}]")

    if singular_left_shape is not None:
        power = float(singular_left_shape)
        if not power > 0.0:
            raise DomainError("singular_left_shape must be positive")
        inv = 1.0 / power
        raw = f
        offset = a

        def f(u):
            x = offset + u ** inv
            jac = inv * u ** (inv - 1.0)
            y = np.asarray(raw(x), dtype=float)
            return y * jac if y.ndim == 1 else y * jac[:, None]

        a, b = 0.0, (b - a) ** power

    # Seed the heap with a uniform split; entries are (-worst_err, seq, ...).
    counter = itertools.count()
    heap = []
    edges = np.linspace(a, b, min_panels + 1)
    total = None
    err_total = None
    for lo, hi in zip(edges[:-1], edges[1:]):
        est, err = _gk_panel(f, lo, hi)
        total = est if total is None else total + est
        err_total = err if err_total is None else err_total + err
        heapq.heappush(heap, (-float(np.max(err)), next(counter), lo, hi, est, err))

    panels = min_panels
    while True:
        target = np.maximum(tol.quad_abs, tol.quad_rel * np.abs(total))
        if np.all(err_total <= target):
            return total if np.ndim(total) else float(total)
        if panels >= max_panels:
            raise QuadratureError(
                f"quadrature did not converge after {panels} panels "
                f"(residual error {float(np.max(err_total)):.3e})",
                estimate=total,
            )
        _, _, lo, hi, est, err = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        est_l, err_l = _gk_panel(f, lo, mid)
        est_r, err_r = _gk_panel(f, mid, hi)
        total = total - est + est_l + est_r
        err_total = err_total - err + err_l + err_r
        heapq.heappush(heap, (-float(np.max(err_l)), next(counter), lo, mid, est_l, err_l))
        heapq.heappush(heap, (-float(np.max(err_r)), next(counter), mid, hi, est_r, err_r))
        panels += 1


# ---------------------------------------------------------------------------
# Root bracketing
# ---------------------------------------------------------------------------

def find_root_bisect(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: Tolerances = DEFAULT_TOL,
    *,
    width: float | None = None,
    max_iter: int = 500,
) -> float:
    """Bisect a sign change of ``f`` on [lo, hi] down to bracket ``width``.

    Raises :class:`BracketError` when f(lo) and f(hi) have the same strict
    sign; the caller decides what a missing sign change means.
    """
    if not lo < hi:
        raise DomainError(f"bracket must satisfy lo < hi, got [{lo!r}, {hi!r}]")
    width = tol.root_tol if width is None else width
    flo = f(lo)
    if flo == 0.0:
        return lo
    fhi = f(hi)
    if fhi == 0.0:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        raise BracketError(f"no sign change on [{lo!r}, {hi!r}]: f(lo)={flo!r}, f(hi)={fhi!r}")
    for _ in range(max_iter):
        if hi - lo <= width:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:  # bracket at float resolution
            break
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (fmid > 0.0) == (flo > 0.0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Derivative-free box minimization
# ---------------------------------------------------------------------------

def minimize_box(
    f: Callable[[np.ndarray], float],
    box: Sequence[tuple[float, float]],
    tol: Tolerances = DEFAULT_TOL,
    *,
    log_axes: Sequence[bool] | None = None,
    grid_points: int = 17,
    extra_starts: Sequence[Sequence[float]] = (),
) -> tuple[np.ndarray, float]:
    """Multistart grid scan plus compass pattern search over a box.

    Intended for low-dimensional objectives with kinks (outage boundaries),
    hence no derivatives anywhere. Axes flagged in ``log_axes`` are searched
    in log space (their bounds must be positive). ``extra_starts`` adds
    caller-supplied candidate points to the coarse grid. The result is never
    worse than the best evaluated candidate, by construction.
    """
    dims = len(box)
    if dims not in (1, 2):
        raise DomainError(f"minimize_box supports 1 or 2 dimensions, got {dims}")
    if grid_points < 17:
        raise DomainError("grid_points must be at least 17")
    log_axes = [False] * dims if log_axes is None else list(log_axes)

    lo = np.empty(dims)
    hi = np.empty(dims)
    for j, (a, b) in enumerate(box):
        if not a <= b:
            raise DomainError(f"empty box on axis {j}: [{a!r}, {b!r}]")
        if log_axes[j]:
            if not a > 0.0:
                raise DomainError(f"log axis {j} requires positive bounds")
            a, b = math.log(a), math.log(b)
        lo[j], hi[j] = a, b
    span = np.maximum(hi - lo, 1e-300)

    def to_params(z):
        return np.array([math.exp(z[j]) if log_axes[j] else z[j] for j in range(dims)])

    def evaluate(z):
        return float(f(to_params(z)))

    axes = [np.linspace(lo[j], hi[j], grid_points) for j in range(dims)]
    if dims == 1:
        candidates = [np.array([v]) for v in axes[0]]
    else:
        candidates = [np.array([u, v]) for u in axes[0] for v in axes[1]]
    for start in extra_starts:
        z = np.empty(dims)
        ok = True
        for j, value in enumerate(start):
            if log_axes[j]:
                if not value > 0.0:
                    ok = False
                    break
                z[j] = math.log(value)
            else:
                z[j] = value
        if ok and np.all(z >= lo - 1e-12) and np.all(z <= hi + 1e-12):
            candidates.append(np.clip(z, lo, hi))

    best_z = None
    best_val = math.inf
    for z in candidates:
        val = evaluate(z)
        if val < best_val:
            best_val, best_z = val, z.copy()

    step = span / (grid_points - 1) / 2.0
    floor = tol.opt_tol * span
    while np.any(step > floor):
        improved = False
        for j in range(dims):
            for sign in (+1.0, -1.0):
                trial = best_z.copy()
                trial[j] = min(max(trial[j] + sign * step[j], lo[j]), hi[j])
                if trial[j] == best_z[j]:
                    continue
                val = evaluate(trial)
                if val < best_val:
                    best_val, best_z = val, trial
                    improved = True
        if not improved:
            step *= 0.5
    return to_params(best_z), best_val
