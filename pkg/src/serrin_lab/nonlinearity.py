"""Coefficient functions ``a`` for div(a(|grad u|) grad u) = 0.

Every nonlinearity carries declared ellipticity bounds ``lambda_bound`` and
``Lambda_bound`` for the ratio ``1 + s a'(s) / a(s)``.  The bounds are not
proved at construction time; :func:`verify_ellipticity` checks them by
sampling.  The flux map ``t -> t a(t)`` is strictly increasing whenever the
lower bound is positive, and :meth:`Nonlinearity.invert_flux` computes its
inverse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from serrin_lab._validation import check_int, check_real, reject_unknown_keys
from serrin_lab.exceptions import DomainError, FluxInversionError, ValidationError

TOL_INV = 1e-12
TOL_ELL = 1e-9

_MAX_LOG_T = 690.0  # exp(690) is close to the float64 ceiling


def _is_scalar(s):
    return np.ndim(s) == 0


def _require_finite(values, s, what):
    if _is_scalar(values):
        if not math.isfinite(values):
            raise DomainError(f"{what} is not finite at s={float(s)!r}")
        return values
    bad = ~np.isfinite(values)
    if bad.any():
        first = np.asarray(s, dtype=float).ravel()[np.argmax(bad.ravel())]
        raise DomainError(f"{what} is not finite at s={first!r}")
    return values


class Nonlinearity:
    """Base class.  Subclasses implement ``_a`` and ``_a_prime``.

    ``a`` and ``a_prime`` accept floats or numpy arrays.
    """

    lambda_bound: float
    Lambda_bound: float

    def _set_bounds(self, lambda_bound, Lambda_bound):
        lam = check_real(lambda_bound, "lambda_bound", gt=0.0)
        Lam = check_real(Lambda_bound, "Lambda_bound")
        if Lam < lam:
            raise ValidationError(
                f"Lambda_bound ({Lam}) must be >= lambda_bound ({lam})"
            )
        self.lambda_bound = lam
        self.Lambda_bound = Lam

    def _check_arg(self, s):
        if _is_scalar(s):
            if s < 0:
                raise DomainError(f"a(s) requires s >= 0, got s={float(s)!r}")
        elif np.any(np.asarray(s) < 0):
            raise DomainError("a(s) requires s >= 0")

    def a(self, s):
        self._check_arg(s)
        return _require_finite(self._a(s), s, "a(s)")

    def a_prime(self, s):
        self._check_arg(s)
        return _require_finite(self._a_prime(s), s, "a'(s)")

    def ellipticity_ratio(self, s):
        """``1 + s a'(s) / a(s)``."""
        if _is_scalar(s) and not s > 0:
            raise DomainError(f"ellipticity ratio requires s > 0, got {s!r}")
        a = self.a(s)
        return 1.0 + s * self.a_prime(s) / a

    def flux(self, t):
        """``t a(t)``, extended by continuity with ``flux(0) = 0``."""
        if _is_scalar(t):
            if t == 0:
                return 0.0
            return t * self.a(t)
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        pos = t != 0
        out[pos] = t[pos] * self.a(t[pos])
        if np.any(t < 0):
            raise DomainError("flux requires t >= 0")
        return out

    def invert_flux(self, s, tol=TOL_INV):
        """Return ``b(s)``, the unique ``t >= 0`` with ``t a(t) = s``.

        Geometric bracket expansion from ``t = 1`` followed by a Newton
        iteration on ``log t`` that falls back to bisection whenever a step
        leaves the bracket.  Arrays are inverted elementwise.
        """
        if not _is_scalar(s):
            arr = np.asarray(s, dtype=float)
            return np.array([self.invert_flux(x, tol) for x in arr.ravel()]).reshape(arr.shape)
        s = float(s)
        if not math.isfinite(s) or s < 0:
            raise DomainError(f"invert_flux requires finite s >= 0, got {s!r}")
        if s == 0.0:
            return 0.0
        log_s = math.log(s)

        def log_flux(x):
            t = math.exp(x)
            f = float(self.flux(t))
            if not (f > 0 and math.isfinite(f)):
                raise FluxInversionError(
                    f"flux is not a positive finite number at t={t!r}", point=t
                )
            return math.log(f)

        # bracket [lo, hi] in log t with log_flux(lo) <= log_s <= log_flux(hi)
        lo = hi = 0.0
        g_lo = g_hi = log_flux(0.0)
        step = 1.0
        if g_lo < log_s:
            while g_hi < log_s:
                lo, g_lo = hi, g_hi
                hi = lo + step
                if hi > _MAX_LOG_T:
                    raise FluxInversionError(
                        f"bracket expansion for s={s!r} overflowed", point=math.exp(lo)
                    )
                g_hi = log_flux(hi)
                if g_hi <= g_lo:
                    raise FluxInversionError(
                        "flux is not increasing between "
                        f"t={math.exp(lo)!r} and t={math.exp(hi)!r}",
                        point=math.exp(hi),
                    )
                step *= 2.0
        elif g_lo > log_s:
            while g_lo > log_s:
                hi, g_hi = lo, g_lo
                lo = hi - step
                if lo < -_MAX_LOG_T:
                    raise FluxInversionError(
                        f"bracket expansion for s={s!r} underflowed", point=math.exp(hi)
                    )
                g_lo = log_flux(lo)
                if g_lo >= g_hi:
                    raise FluxInversionError(
                        "flux is not increasing between "
                        f"t={math.exp(lo)!r} and t={math.exp(hi)!r}",
                        point=math.exp(lo),
                    )
                step *= 2.0
        else:
            return 1.0

        if g_lo == log_s:
            return math.exp(lo)
        if g_hi == log_s:
            return math.exp(hi)

        x = 0.5 * (lo + hi)
        best_x, best_res = x, math.inf
        for _ in range(200):
            g = log_flux(x)
            res = g - log_s
            if abs(res) < best_res:
                best_x, best_res = x, abs(res)
            # |expm1(res)| is the relative flux residual
            if abs(math.expm1(res)) <= tol:
                return math.exp(x)
            if res < 0:
                lo = x
            else:
                hi = x
            if hi - lo <= 4.0 * np.finfo(float).eps * max(1.0, abs(x)):
                break
            slope = float(self.ellipticity_ratio(math.exp(x)))
            x_new = x - res / slope if slope > 0 and math.isfinite(slope) else math.nan
            if not lo < x_new < hi:
                x_new = 0.5 * (lo + hi)
            x = x_new
        return math.exp(best_x)

    def to_config(self):
        raise ValidationError(f"{type(self).__name__} has no JSON representation")


class PLaplacian(Nonlinearity):
    """``a(s) = s**(p - 2)``; the ellipticity ratio is identically ``p - 1``."""

    def __init__(self, p, lambda_bound=None, Lambda_bound=None):
        self.p = check_real(p, "p", gt=0.0)
        default = self.p - 1.0
        if default <= 0 and lambda_bound is None:
            # p <= 1 is not elliptic; keep the ratio as the "bound" for reports
            self.lambda_bound = self.Lambda_bound = default
            return
        self._set_bounds(
            default if lambda_bound is None else lambda_bound,
            default if Lambda_bound is None else Lambda_bound,
        )

    def _check_arg(self, s):
        super()._check_arg(s)
        if self.p < 2:
            zero = (s == 0) if _is_scalar(s) else np.any(np.asarray(s) == 0)
            if zero:
                raise DomainError(f"p-Laplacian with p={self.p} has a pole at s=0")

    def _a(self, s):
        return s ** (self.p - 2.0)

    def _a_prime(self, s):
        return (self.p - 2.0) * s ** (self.p - 3.0)

    def to_config(self):
        return {"kind": "p_laplacian", "p": self.p}

    def __repr__(self):
        return f"PLaplacian(p={self.p!r})"


class BoundedGradient(Nonlinearity):
    """``a(s) = (1 + s**2)**((p - 2) / 2)``, regular at ``s = 0``.

    The ratio ``1 + (p - 2) s**2 / (1 + s**2)`` lies between 1 and ``p - 1``.
    """

    def __init__(self, p, lambda_bound=None, Lambda_bound=None):
        self.p = check_real(p, "p", gt=0.0)
        lo, hi = min(1.0, self.p - 1.0), max(1.0, self.p - 1.0)
        if lambda_bound is None and lo <= 0:
            raise ValidationError(
                f"BoundedGradient(p={self.p}) has no positive default lambda_bound; "
                "declare the bounds explicitly"
            )
        self._set_bounds(
            lo if lambda_bound is None else lambda_bound,
            hi if Lambda_bound is None else Lambda_bound,
        )

    def _a(self, s):
        return (1.0 + s * s) ** (0.5 * (self.p - 2.0))

    def _a_prime(self, s):
        return (self.p - 2.0) * s * (1.0 + s * s) ** (0.5 * (self.p - 4.0))

    def to_config(self):
        return {"kind": "bounded_gradient", "p": self.p}

    def __repr__(self):
        return f"BoundedGradient(p={self.p!r})"


class CustomNonlinearity(Nonlinearity):
    """User-supplied ``a`` and ``a'`` with declared ellipticity bounds.

    The callables may be scalar-only; arrays are then evaluated elementwise.
    """

    def __init__(
        self,
        a: Callable[[float], float],
        a_prime: Callable[[float], float],
        lambda_bound: float,
        Lambda_bound: float,
        name: str = "custom",
    ):
        if not callable(a) or not callable(a_prime):
            raise ValidationError("custom nonlinearity needs callables a and a_prime")
        self._func = a
        self._dfunc = a_prime
        self.name = name
        self._set_bounds(lambda_bound, Lambda_bound)

    @staticmethod
    def _apply(func, s):
        if _is_scalar(s):
            return float(func(float(s)))
        arr = np.asarray(s, dtype=float)
        return np.array([func(x) for x in arr.ravel()], dtype=float).reshape(arr.shape)

    def _a(self, s):
        return self._apply(self._func, s)

    def _a_prime(self, s):
        return self._apply(self._dfunc, s)

    def __repr__(self):
        return f"CustomNonlinearity(name={self.name!r})"


class RegularizedNonlinearity(Nonlinearity):
    """``a_eps(s) = max(a(sqrt(eps**2 + s**2)), eps)``.

    Smooth and bounded below by ``eps`` at ``s = 0`` even for p-Laplacians
    with ``p < 2``.  The declared bounds are inherited from ``base``.
    """

    def __init__(self, base: Nonlinearity, epsilon: float):
        if not isinstance(base, Nonlinearity):
            raise ValidationError("base must be a Nonlinearity")
        self.base = base
        self.epsilon = check_real(epsilon, "epsilon", gt=0.0)
        self.lambda_bound = base.lambda_bound
        self.Lambda_bound = base.Lambda_bound

    def _sigma(self, s):
        return np.sqrt(self.epsilon**2 + s * s) if not _is_scalar(s) else math.sqrt(
            self.epsilon**2 + s * s
        )

    def _a(self, s):
        raw = self.base.a(self._sigma(s))
        return np.maximum(raw, self.epsilon) if not _is_scalar(s) else max(raw, self.epsilon)

    def _a_prime(self, s):
        sigma = self._sigma(s)
        raw = self.base.a(sigma)
        slope = self.base.a_prime(sigma) * s / sigma
        if _is_scalar(s):
            return slope if raw > self.epsilon else 0.0
        return np.where(raw > self.epsilon, slope, 0.0)

    def to_config(self):
        return {**self.base.to_config(), "epsilon": self.epsilon}

    def __repr__(self):
        return f"RegularizedNonlinearity({self.base!r}, epsilon={self.epsilon!r})"


@dataclass(frozen=True)
class EllipticityReport:
    lambda_hat: float
    Lambda_hat: float
    passed: bool
    positive: bool
    s_min: float
    s_max: float
    samples: int
    worst_s: float

    def to_dict(self):
        return {
            "lambda_hat": self.lambda_hat,
            "Lambda_hat": self.Lambda_hat,
            "pass": self.passed,
            "positive": self.positive,
            "s_min": self.s_min,
            "s_max": self.s_max,
            "samples": self.samples,
            "worst_s": self.worst_s,
        }


def verify_ellipticity(nl, s_min=1e-6, s_max=1e6, samples=1000, tol=TOL_ELL):
    """Sample the ellipticity ratio on a log-spaced grid of ``s``.

    Passes iff ``a > 0`` at every sample and the ratio stays inside the
    declared ``[lambda_bound, Lambda_bound]`` up to ``tol``.
    """
    s_min = check_real(s_min, "s_min", gt=0.0)
    s_max = check_real(s_max, "s_max", gt=s_min)
    samples = check_int(samples, "samples", ge=2)
    s = np.geomspace(s_min, s_max, samples)
    a = nl.a(s)
    ratio = 1.0 + s * nl.a_prime(s) / a
    _require_finite(ratio, s, "ellipticity ratio")
    positive = bool(np.all(a > 0))
    excess = np.maximum(nl.lambda_bound - ratio, ratio - nl.Lambda_bound)
    passed = positive and bool(np.all(excess <= tol))
    return EllipticityReport(
        lambda_hat=float(ratio.min()),
        Lambda_hat=float(ratio.max()),
        passed=passed,
        positive=positive,
        s_min=s_min,
        s_max=s_max,
        samples=samples,
        worst_s=float(s[np.argmax(excess)]),
    )


_KINDS = {"p_laplacian": PLaplacian, "bounded_gradient": BoundedGradient}


def nonlinearity_from_config(config):
    """Build a nonlinearity from ``{"kind": ..., "p": ...}``; requires ``p > 1``."""
    if not isinstance(config, dict):
        raise ValidationError("nonlinearity config must be a JSON object")
    reject_unknown_keys(config, {"kind", "p"}, "nonlinearity config")
    kind = config.get("kind")
    if kind not in _KINDS:
        raise ValidationError(
            f"unknown nonlinearity kind {kind!r}; expected one of {sorted(_KINDS)}"
        )
    if "p" not in config:
        raise ValidationError("nonlinearity config needs 'p'")
    p = check_real(config["p"], "p", gt=1.0)
    return _KINDS[kind](p)
