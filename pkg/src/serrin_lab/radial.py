"""Exact radial solutions on a ball centred at the singular point.

With ``b`` the inverse of the flux map ``t -> t a(t)`` and
``K = R**(n-1) * c * a(c)``, the profile

    v(r) = integral_r^R b(K rho**(1-n)) d rho

has ``v(R) = 0``, ``v'(R) = -c`` and satisfies the radial first integral
``r**(n-1) * flux(|v'(r)|) = K``.  Its limit at ``r -> 0`` is the singular
value ``M``, which may be finite or infinite.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np
from scipy import integrate, interpolate

from serrin_lab._validation import check_int, check_real
from serrin_lab.exceptions import DomainError, QuadratureError, ValidationError
from serrin_lab.nonlinearity import Nonlinearity, verify_ellipticity

TOL_QUAD = 1e-10
SLOPE_TOL = 1e-3
# decay ratios of the per-decade increments of the M integral
_RATIO_TOL = 0.02
_GEOMETRIC_RATIO = 0.9


@dataclass(frozen=True)
class SingularValue:
    """Classification of ``M = lim_{r->0} v(r)``.

    ``kind`` is ``"finite"``, ``"infinite"`` or ``"inconclusive"``; ``value``
    is ``inf`` for infinite and ``nan`` for inconclusive results.  ``slope``
    is the fitted log-log slope of the integrand near the origin.
    """

    kind: str
    value: float
    slope: float
    detail: str = ""

    @property
    def is_finite(self):
        return self.kind == "finite"

    def __str__(self):
        if self.kind == "finite":
            return f"finite M={self.value:.12g}"
        return self.kind


def _quad(func, a, b, tol, what):
    value, err, info = integrate.quad(
        func, a, b, epsabs=0.01 * tol, epsrel=1e-13, limit=500, full_output=True
    )[:3]
    # absolute tolerance, relaxed to relative for large values
    if err > max(tol, 1e-11 * abs(value)):
        raise QuadratureError(
            f"quadrature of {what} did not converge (error estimate {err:.3g})",
            error_estimate=err,
        )
    return value


class RadialSolution:
    """Radial oracle on the ball ``B_R(O)`` in dimension ``n``.

    Immutable apart from a lazily computed, lock-protected ``M``.
    """

    def __init__(self, nl: Nonlinearity, n: int, R: float, c: float, tol_quad=TOL_QUAD):
        if not isinstance(nl, Nonlinearity):
            raise ValidationError("nl must be a Nonlinearity")
        self.nl = nl
        self.n = check_int(n, "n", ge=2)
        self.R = check_real(R, "R", gt=0.0)
        self.c = check_real(c, "c", gt=0.0)
        self.tol_quad = check_real(tol_quad, "tol_quad", gt=0.0)
        self.K = self.R ** (self.n - 1) * float(nl.flux(self.c))
        self._singular = None
        self._lock = threading.Lock()

    def __repr__(self):
        return f"RadialSolution({self.nl!r}, n={self.n}, R={self.R!r}, c={self.c!r})"

    def integrand(self, rho):
        """``b(K rho**(1-n))``, i.e. ``|v'(rho)|``."""
        return self.nl.invert_flux(self.K * rho ** (1 - self.n))

    def _check_r(self, r):
        r = float(r)
        if not 0.0 < r <= self.R:
            raise DomainError(f"radius must lie in (0, R={self.R}], got {r!r}")
        return r

    def _segment(self, r_lo, r_hi):
        """Integral of the integrand over ``[r_lo, r_hi]`` in ``tau = log(r_hi/rho)``."""
        if r_lo >= r_hi:
            return 0.0
        span = math.log(r_hi / r_lo)

        def f(tau):
            rho = r_hi * math.exp(-tau)
            return rho * self.integrand(rho)

        return _quad(f, 0.0, span, self.tol_quad, f"v on [{r_lo:.3g}, {r_hi:.3g}]")

    def v(self, r):
        r = self._check_r(r)
        if r == self.R:
            return 0.0
        return self._segment(r, self.R)

    def v_prime(self, r):
        return -self.integrand(self._check_r(r))

    def first_integral_defect(self, r_samples):
        """Max relative deviation of ``r**(n-1) flux(|v'(r)|)`` from ``K``."""
        worst = 0.0
        for r in r_samples:
            r = self._check_r(r)
            lhs = r ** (self.n - 1) * float(self.nl.flux(-self.v_prime(r)))
            worst = max(worst, abs(lhs - self.K) / self.K)
        return worst

    def table(self, n_points=1024, r_min=None):
        """Sampled profile on log-spaced radii in ``[r_min, R]``.

        Returns arrays ``(r, v, v_prime)`` with ``r`` increasing.  ``v`` is
        accumulated from the outer radius inward.
        """
        n_points = check_int(n_points, "n_points", ge=2)
        r_min = 1e-4 * self.R if r_min is None else self._check_r(r_min)
        r = np.geomspace(r_min, self.R, n_points)
        r[-1] = self.R
        pieces = np.array([self._segment(r[i], r[i + 1]) for i in range(n_points - 1)])
        v = np.zeros(n_points)
        v[:-1] = np.cumsum(pieces[::-1])[::-1]
        vp = np.array([self.v_prime(x) for x in r])
        return r, v, vp

    def interpolant(self, r_min, n_points=2048):
        """Vectorised ``v`` on ``[r_min, R]``: cubic Hermite through :meth:`table`.

        Uses the exact derivative at each knot; knots are log-spaced.
        """
        r, v, vp = self.table(n_points, r_min)
        spline = interpolate.CubicHermiteSpline(np.log(r), v, vp * r)
        lo = r[0]

        def profile(x):
            x = np.asarray(x, dtype=float)
            if np.any(x < lo * (1 - 1e-12)) or np.any(x > self.R * (1 + 1e-12)):
                raise DomainError(f"interpolant covers [{lo:.6g}, {self.R:.6g}] only")
            return spline(np.log(np.clip(x, lo, self.R)))

        return profile

    @property
    def M(self):
        return self.singular_value().value

    def singular_value(self):
        with self._lock:
            if self._singular is None:
                self._singular = self._classify()
            return self._singular

    def _local_slope(self, lo_exp, hi_exp, points=17):
        rho = self.R * np.logspace(lo_exp, hi_exp, points)
        g = np.array([self.integrand(x) for x in rho])
        return float(np.polyfit(np.log(rho), np.log(g), 1)[0])

    def _decade_increments(self, first=4, last=12):
        return np.array(
            [
                self._segment(self.R * 10.0 ** -(k + 1), self.R * 10.0**-k)
                for k in range(first, last)
            ]
        )

    def _power_tail(self, rho0, slope):
        return rho0 * self.integrand(rho0) / (1.0 + slope)

    def _classify(self):
        slope = self._local_slope(-8, -4)
        if slope < -1.0 - SLOPE_TOL:
            inc = self._decade_increments()
            if np.all(inc[1:] >= (1.0 - _RATIO_TOL) * inc[:-1]):
                return SingularValue("infinite", math.inf, slope)
            return SingularValue(
                "inconclusive", math.nan, slope, "steep slope but increments shrink"
            )
        if slope > -1.0 + SLOPE_TOL:
            head = self._segment(self.R * 1e-8, self.R)
            m1 = head + self._power_tail(self.R * 1e-8, slope)
            deep_slope = self._local_slope(-16, -12)
            if deep_slope <= -1.0 + SLOPE_TOL:
                return SingularValue(
                    "inconclusive", math.nan, slope, "slope steepens towards the origin"
                )
            head2 = head + self._segment(self.R * 1e-16, self.R * 1e-8)
            m2 = head2 + self._power_tail(self.R * 1e-16, deep_slope)
            if abs(m2 - m1) <= max(100 * self.tol_quad, 1e-9 * abs(m2)):
                return SingularValue("finite", m2, slope)
            return SingularValue(
                "inconclusive",
                math.nan,
                slope,
                f"tail extrapolations disagree ({m1!r} vs {m2!r})",
            )
        # log-log slope within SLOPE_TOL of -1: decide from the increments
        inc = self._decade_increments()
        ratios = inc[1:] / inc[:-1]
        if np.all(ratios >= 1.0 - _RATIO_TOL):
            return SingularValue("infinite", math.inf, slope, "logarithmic divergence")
        if np.all(ratios <= _GEOMETRIC_RATIO):
            r = float(ratios[-1])
            value = self._segment(self.R * 1e-12, self.R) + inc[-1] * r / (1.0 - r)
            return SingularValue("finite", value, slope)
        return SingularValue(
            "inconclusive", math.nan, slope, "integrand is close to 1/rho near the origin"
        )


def make_radial(nl, n, R, c, check=True, tol_quad=TOL_QUAD):
    """Construct the radial oracle; with ``check`` the nonlinearity is verified first."""
    if check:
        report = verify_ellipticity(nl, samples=200)
        if not report.passed:
            raise ValidationError(
                f"{nl!r} fails the ellipticity check: ratio range "
                f"[{report.lambda_hat:.6g}, {report.Lambda_hat:.6g}] vs declared "
                f"[{nl.lambda_bound:.6g}, {nl.Lambda_bound:.6g}]"
            )
    return RadialSolution(nl, n, R, c, tol_quad=tol_quad)
