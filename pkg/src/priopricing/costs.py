"""Waiting-cost distributions and the shared adaptive quadrature.

Four parametric families are supported, all with a continuous, strictly
positive density on a support inside [0, inf) and a finite mean. Degenerate
(point-mass) inputs are rejected at construction. Densities, CDFs and
inverse-CDF sampling accept scalars or numpy arrays.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

# Mass dropped when an infinite support is truncated for integration.
TRUNCATION_MASS = 1e-10

_SQRT_2PI = math.sqrt(2.0 * math.pi)


# ---------------------------------------------------------------------------
# adaptive quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int


class QuadratureError(RuntimeError):
    """Subdivision limit reached before the tolerance; carries the partial
    result so callers can report the achieved accuracy."""

    def __init__(self, message: str, partial: QuadratureResult):
        super().__init__(message)
        self.partial = partial


def integrate(f, a: float, b: float, abs_tol: float = 1e-10,
              rel_tol: float = 1e-9, max_intervals: int = 4096) -> QuadratureResult:
    """Integrate ``f`` on [a, b] by globally adaptive Simpson refinement.

    The interval with the largest Richardson error estimate is bisected
    until the summed estimate drops below max(abs_tol, rel_tol * |value|).

    Args:
        f: integrand, finite on [a, b].
        a, b: finite limits with a <= b.
        abs_tol: absolute tolerance on the error estimate.
        rel_tol: relative tolerance on the error estimate.
        max_intervals: subdivision limit.

    Returns:
        QuadratureResult with the value, the summed error estimate and the
        number of integrand evaluations.

    Raises:
        QuadratureError: the subdivision limit was reached first; the
            exception carries the partial QuadratureResult.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("integration limits must be finite")
    if b < a:
        raise ValueError(f"need a <= b, got a={a!r}, b={b!r}")
    if a == b:
        return QuadratureResult(0.0, 0.0, 0)

    evals = 0

    def panel(x0, x2, f0, f2):
        # One Simpson panel plus its bisected refinement; the Richardson
        # comparison of the two gives the error estimate.
        nonlocal evals
        x1 = 0.5 * (x0 + x2)
        xl = 0.5 * (x0 + x1)
        xr = 0.5 * (x1 + x2)
        f1 = f(x1)
        fl = f(xl)
        fr = f(xr)
        evals += 3
        h = x2 - x0
        coarse = h * (f0 + 4.0 * f1 + f2) / 6.0
        left = 0.5 * h * (f0 + 4.0 * fl + f1) / 6.0
        right = 0.5 * h * (f1 + 4.0 * fr + f2) / 6.0
        fine = left + right
        err = abs(fine - coarse) / 15.0
        # Richardson extrapolation of the bisected pair: one order better
        # at no extra evaluations, leaving err a conservative estimate.
        value = fine + (fine - coarse) / 15.0
        return err, x0, x1, x2, f0, f1, f2, value

    fa = f(a)
    fb = f(b)
    evals += 2
    node = panel(a, b, fa, fb)
    heap = [(-node[0], node)]
    total_value = node[7]
    total_err = node[0]

    while total_err > max(abs_tol, rel_tol * abs(total_value)):
        if len(heap) >= max_intervals:
            partial = QuadratureResult(total_value, total_err, evals)
            raise QuadratureError(
                f"quadrature did not converge: error estimate {total_err:.3g} "
                f"after {len(heap)} intervals", partial)
        _, (err, x0, x1, x2, f0, f1, f2, fine) = heapq.heappop(heap)
        total_value -= fine
        total_err -= err
        for child in (panel(x0, x1, f0, f1), panel(x1, x2, f1, f2)):
            heapq.heappush(heap, (-child[0], child))
            total_value += child[7]
            total_err += child[0]

    return QuadratureResult(total_value, total_err, evals)


# ---------------------------------------------------------------------------
# cost distributions
# ---------------------------------------------------------------------------

def _as_float_or_array(c):
    arr = np.asarray(c, dtype=float)
    return arr, arr.ndim == 0


def _ret(arr, scalar):
    return float(arr) if scalar else arr


def _check_prob(u) -> None:
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("probability argument must lie in [0, 1]")


class CostDistribution:
    """Base class: per-unit-time waiting-cost distribution of a customer."""

    support: tuple[float, float]

    def pdf(self, c):
        raise NotImplementedError

    def cdf(self, c):
        raise NotImplementedError

    def sample(self, u):
        """Inverse-transform sample at uniform(0, 1) value(s) ``u``."""
        raise NotImplementedError

    def mean(self) -> float:
        raise NotImplementedError

    def spec(self) -> str:
        """Round-trippable text form (see parse_distribution)."""
        raise NotImplementedError

    def truncated_support(self) -> tuple[float, float]:
        """Support with an infinite upper end cut at the 1 - 1e-10 quantile."""
        lo, hi = self.support
        if math.isinf(hi):
            hi = float(self.sample(1.0 - TRUNCATION_MASS))
        return lo, hi

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return f"{type(self).__name__}({self.spec()!r})"


class Uniform(CostDistribution):
    """Uniform cost on [lo, hi], 0 <= lo < hi."""

    def __init__(self, lo: float, hi: float):
        if not (0.0 <= lo < hi) or not math.isfinite(hi):
            raise ValueError(f"need 0 <= lo < hi, got lo={lo!r}, hi={hi!r}")
        self.lo = float(lo)
        self.hi = float(hi)
        self.support = (self.lo, self.hi)

    def pdf(self, c):
        arr, scalar = _as_float_or_array(c)
        dens = 1.0 / (self.hi - self.lo)
        return _ret(np.where((arr >= self.lo) & (arr <= self.hi), dens, 0.0), scalar)

    def cdf(self, c):
        arr, scalar = _as_float_or_array(c)
        return _ret(np.clip((arr - self.lo) / (self.hi - self.lo), 0.0, 1.0), scalar)

    def sample(self, u):
        _check_prob(u)
        arr, scalar = _as_float_or_array(u)
        return _ret(self.lo + arr * (self.hi - self.lo), scalar)

    def mean(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def spec(self) -> str:
        return f"uniform {self.lo:g} {self.hi:g}"


class Exponential(CostDistribution):
    """Exponential cost with the given rate."""

    def __init__(self, rate: float):
        if not (rate > 0.0 and math.isfinite(rate)):
            raise ValueError(f"rate must be positive, got {rate!r}")
        self.rate = float(rate)
        self.support = (0.0, math.inf)

    def pdf(self, c):
        arr, scalar = _as_float_or_array(c)
        safe = np.where(arr >= 0.0, arr, 0.0)
        return _ret(np.where(arr >= 0.0, self.rate * np.exp(-self.rate * safe), 0.0),
                    scalar)

    def cdf(self, c):
        arr, scalar = _as_float_or_array(c)
        safe = np.where(arr >= 0.0, arr, 0.0)
        return _ret(np.where(arr >= 0.0, -np.expm1(-self.rate * safe), 0.0), scalar)

    def sample(self, u):
        _check_prob(u)
        arr, scalar = _as_float_or_array(u)
        with np.errstate(divide="ignore"):
            out = -np.log1p(-arr) / self.rate
        return _ret(out, scalar)

    def mean(self) -> float:
        return 1.0 / self.rate

    def spec(self) -> str:
        return f"exponential {self.rate:g}"


class LogNormal(CostDistribution):
    """Lognormal cost: log C ~ Normal(log_mean, log_sd)."""

    def __init__(self, log_mean: float, log_sd: float):
        if not (log_sd > 0.0 and math.isfinite(log_sd)) or not math.isfinite(log_mean):
            raise ValueError(
                f"need finite log_mean and log_sd > 0, got {log_mean!r}, {log_sd!r}")
        self.log_mean = float(log_mean)
        self.log_sd = float(log_sd)
        self.support = (0.0, math.inf)

    def pdf(self, c):
        arr, scalar = _as_float_or_array(c)
        safe = np.where(arr > 0.0, arr, 1.0)
        z = (np.log(safe) - self.log_mean) / self.log_sd
        dens = np.exp(-0.5 * z * z) / (safe * self.log_sd * _SQRT_2PI)
        return _ret(np.where(arr > 0.0, dens, 0.0), scalar)

    def cdf(self, c):
        arr, scalar = _as_float_or_array(c)
        safe = np.where(arr > 0.0, arr, 1.0)
        z = (np.log(safe) - self.log_mean) / self.log_sd
        return _ret(np.where(arr > 0.0, ndtr(z), 0.0), scalar)

    def sample(self, u):
        _check_prob(u)
        arr, scalar = _as_float_or_array(u)
        with np.errstate(divide="ignore"):
            out = np.exp(self.log_mean + self.log_sd * ndtri(arr))
        return _ret(out, scalar)

    def mean(self) -> float:
        return math.exp(self.log_mean + 0.5 * self.log_sd ** 2)

    def spec(self) -> str:
        return f"lognormal {self.log_mean:g} {self.log_sd:g}"


class TruncatedNormal(CostDistribution):
    """Normal(loc, scale) conditioned on being nonnegative."""

    def __init__(self, loc: float, scale: float):
        if not (scale > 0.0 and math.isfinite(scale)) or not math.isfinite(loc):
            raise ValueError(
                f"need finite loc and scale > 0, got {loc!r}, {scale!r}")
        self.loc = float(loc)
        self.scale = float(scale)
        self._mass = float(ndtr(self.loc / self.scale))  # P(Normal >= 0)
        self.support = (0.0, math.inf)

    def pdf(self, c):
        arr, scalar = _as_float_or_array(c)
        z = (arr - self.loc) / self.scale
        dens = np.exp(-0.5 * z * z) / (self.scale * _SQRT_2PI * self._mass)
        return _ret(np.where(arr >= 0.0, dens, 0.0), scalar)

    def cdf(self, c):
        arr, scalar = _as_float_or_array(c)
        lower = ndtr(-self.loc / self.scale)
        out = (ndtr((arr - self.loc) / self.scale) - lower) / self._mass
        return _ret(np.where(arr >= 0.0, np.clip(out, 0.0, 1.0), 0.0), scalar)

    def sample(self, u):
        _check_prob(u)
        arr, scalar = _as_float_or_array(u)
        lower = ndtr(-self.loc / self.scale)
        with np.errstate(divide="ignore"):
            out = self.loc + self.scale * ndtri(lower + arr * self._mass)
        return _ret(np.maximum(out, 0.0), scalar)

    def mean(self) -> float:
        alpha = -self.loc / self.scale
        phi = math.exp(-0.5 * alpha * alpha) / _SQRT_2PI
        return self.loc + self.scale * phi / self._mass

    def spec(self) -> str:
        return f"truncnorm {self.loc:g} {self.scale:g}"


_FAMILIES = {
    "uniform": (Uniform, 2),
    "exponential": (Exponential, 1),
    "lognormal": (LogNormal, 2),
    "truncnorm": (TruncatedNormal, 2),
}


def parse_distribution(text: str) -> CostDistribution:
    """Parse a distribution spec like ``"uniform 0 2"`` or ``"exponential 1.0"``."""
    tokens = text.split()
    if not tokens:
        raise ValueError("empty cost-distribution spec")
    name = tokens[0].lower()
    if name not in _FAMILIES:
        raise ValueError(
            f"unknown cost-distribution family {name!r}; "
            f"expected one of {sorted(_FAMILIES)}")
    cls, arity = _FAMILIES[name]
    args = tokens[1:]
    if len(args) != arity:
        raise ValueError(f"{name} takes {arity} parameter(s), got {len(args)}")
    try:
        values = [float(t) for t in args]
    except ValueError as exc:
        raise ValueError(f"bad numeric parameter in {text!r}") from exc
    return cls(*values)
