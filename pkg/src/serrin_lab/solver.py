"""Finite differences for div(a_eps(|grad u|) grad u) = 0 on an excised domain.

The singular point is replaced by a small disk ``B_delta(O)`` carrying
Dirichlet data, the outer boundary carries ``u = 0``.  Nodes of a uniform
grid (the origin is a node) are unknowns when they lie strictly inside
``Omega \\ B_delta``.  Every unknown has four arms; an arm that leaves the
domain is cut at the exact boundary crossing, ``theta * h`` away, where the
Dirichlet value is imposed.

Each Picard step freezes the coefficient at the previous iterate and solves

    sum_arms  w (u_P - u_nb) = 0,   w = a_face * h / arm,

which is symmetric positive definite with non-positive off-diagonals, so a
Jacobi-preconditioned conjugate gradient applies and the discrete maximum
principle holds for every iterate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import LinearOperator, cg
from scipy.spatial import cKDTree

from serrin_lab._validation import check_int, check_real
from serrin_lab.exceptions import (
    ConvergenceError,
    FluxExtractionError,
    ValidationError,
)
from serrin_lab.geometry import PlanarDomain, reflect_point, as_direction
from serrin_lab.nonlinearity import Nonlinearity, RegularizedNonlinearity
from serrin_lab.radial import RadialSolution

THETA = 0.7
PICARD_TOL = 1e-9
MAX_ITER = 500
CG_TOL = 1e-12
RANGE_TOL = 1e-8
MAX_DROPPED = 0.05

# +x, -x, +y, -y
_DIRS = ((1, 0), (-1, 0), (0, 1), (0, -1))


@dataclass(frozen=True)
class ExcisedProblem:
    """Dirichlet problem on ``domain \\ B_delta(O)``.

    ``inner_data`` / ``outer_data`` optionally replace the constant boundary
    values by callables of an ``(N, 2)`` array of boundary points.
    """

    domain: PlanarDomain
    delta: float
    nl_reg: RegularizedNonlinearity
    inner_value: float
    outer_value: float = 0.0
    inner_data: Callable | None = field(default=None, compare=False)
    outer_data: Callable | None = field(default=None, compare=False)

    def __post_init__(self):
        if not isinstance(self.domain, PlanarDomain):
            raise ValidationError("domain must be a PlanarDomain")
        if not isinstance(self.nl_reg, RegularizedNonlinearity):
            raise ValidationError("nl_reg must be a RegularizedNonlinearity")
        delta = check_real(self.delta, "delta", gt=0.0)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "inner_value", check_real(self.inner_value, "inner_value", ge=0.0))
        object.__setattr__(self, "outer_value", check_real(self.outer_value, "outer_value"))
        if not self.domain.contains_origin:
            raise ValidationError("the origin must lie strictly inside the domain")
        if not self.domain.distance_to_origin_boundary() > 2.0 * delta:
            raise ValidationError(
                f"B_(2 delta)(O) must lie inside the domain (delta={delta}, "
                f"dist(O, boundary)={self.domain.distance_to_origin_boundary():.6g})"
            )

    def outer_values(self, points):
        if self.outer_data is None:
            return np.full(len(points), self.outer_value)
        return np.asarray(self.outer_data(points), dtype=float).reshape(len(points))

    def inner_values(self, points):
        if self.inner_data is None:
            return np.full(len(points), self.inner_value)
        return np.asarray(self.inner_data(points), dtype=float).reshape(len(points))


def make_problem(domain, nl, delta=None, inner_value="auto", c=1.0, epsilon=None):
    """Build an :class:`ExcisedProblem` with the usual defaults.

    ``delta`` defaults to a tenth of ``dist(O, boundary)``.  ``inner_value
    = "auto"`` takes the radial profile ``v(delta)`` of the ball of radius
    ``dist(O, boundary)`` with boundary flux ``c``; this needs a finite
    profile, which holds for every ``delta > 0``.
    ``epsilon`` defaults to ``1e-8 * inner_value / diameter``.
    """
    base = nl.base if isinstance(nl, RegularizedNonlinearity) else nl
    if not isinstance(base, Nonlinearity):
        raise ValidationError("nl must be a Nonlinearity")
    if not domain.contains_origin:
        raise ValidationError("the origin must lie strictly inside the domain")
    R = domain.distance_to_origin_boundary()
    delta = 0.1 * R if delta is None else check_real(delta, "delta", gt=0.0)
    if isinstance(inner_value, str):
        if inner_value != "auto":
            raise ValidationError(f"inner_value must be a number or 'auto', got {inner_value!r}")
        inner_value = RadialSolution(base, 2, R, check_real(c, "c", gt=0.0)).v(delta)
    inner_value = check_real(inner_value, "inner_value", ge=0.0)
    if isinstance(nl, RegularizedNonlinearity) and epsilon is None:
        nl_reg = nl
    else:
        if epsilon is None:
            scale = inner_value if inner_value > 0 else 1.0
            epsilon = 1e-8 * scale / domain.diameter
        nl_reg = RegularizedNonlinearity(base, epsilon)
    return ExcisedProblem(domain, delta, nl_reg, inner_value)


class _Discretization:
    """Grid, node classification and cut arms for one ``(problem, h)`` pair."""

    def __init__(self, problem, h):
        self.problem = problem
        self.h = h
        dom = problem.domain
        probe = dom.point_at(np.linspace(0.0, 1.0, 2049))
        lo_x, hi_x = probe[:, 0].min(), probe[:, 0].max()
        lo_y, hi_y = probe[:, 1].min(), probe[:, 1].max()
        ix = np.arange(math.floor(lo_x / h) - 1, math.ceil(hi_x / h) + 2)
        iy = np.arange(math.floor(lo_y / h) - 1, math.ceil(hi_y / h) + 2)
        self.x = ix * h
        self.y = iy * h
        X, Y = np.meshgrid(self.x, self.y, indexing="ij")
        self.shape = X.shape
        pts = np.stack([X.ravel(), Y.ravel()], axis=1)
        sd_out = dom.signed_distance(pts).reshape(self.shape)
        sd_in = (np.hypot(X, Y) - problem.delta)
        self.unknown = (sd_out > 0) & (sd_in > 0)
        self.index = np.full(self.shape, -1, dtype=np.int64)
        self.index[self.unknown] = np.arange(int(self.unknown.sum()))
        self.n = int(self.unknown.sum())
        self.I, self.J = np.nonzero(self.unknown)
        self.P = np.stack([self.x[self.I], self.y[self.J]], axis=1)
        self.sd_out = sd_out
        self.sd_in = sd_in

        # per direction: neighbour unknown index (-1 if cut), arm length, boundary data
        self.nb = []
        self.arm = []
        self.bval = []
        outer_pts, outer_vals, inner_pts, inner_vals = [], [], [], []
        for dx, dy in _DIRS:
            # the bounding box has a one-node margin, so neighbours exist
            ni, nj = self.I + dx, self.J + dy
            nb = self.index[ni, nj]
            arm = np.full(self.n, h)
            bval = np.zeros(self.n)
            cut = np.nonzero(nb < 0)[0]
            if len(cut):
                e = np.array([dx, dy], dtype=float)
                P = self.P[cut]
                th_out = np.full(len(cut), np.inf)
                out_hit = sd_out[ni[cut], nj[cut]] <= 0
                if out_hit.any():
                    th_out[out_hit] = self._outer_fraction(P[out_hit], e)
                th_in = np.full(len(cut), np.inf)
                in_hit = sd_in[ni[cut], nj[cut]] <= 0
                if in_hit.any():
                    th_in[in_hit] = self._inner_fraction(P[in_hit], e)
                is_inner = th_in < th_out
                theta = np.minimum(th_in, th_out)
                bpt = P + (theta * h)[:, None] * e
                vals = np.empty(len(cut))
                if (~is_inner).any():
                    vals[~is_inner] = problem.outer_values(bpt[~is_inner])
                    outer_pts.append(bpt[~is_inner])
                    outer_vals.append(vals[~is_inner])
                if is_inner.any():
                    vals[is_inner] = problem.inner_values(bpt[is_inner])
                    inner_pts.append(bpt[is_inner])
                    inner_vals.append(vals[is_inner])
                arm[cut] = theta * h
                bval[cut] = vals
            self.nb.append(nb)
            self.arm.append(arm)
            self.bval.append(bval)

        def stack(chunks, width):
            return np.concatenate(chunks) if chunks else np.empty((0,) + width)

        self.outer_points = stack(outer_pts, (2,))
        self.outer_values = stack(outer_vals, ())
        self.inner_points = stack(inner_pts, (2,))
        self.inner_values = stack(inner_vals, ())

    def _outer_fraction(self, P, e):
        dom = self.problem.domain
        lo = np.zeros(len(P))
        hi = np.ones(len(P))
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            inside = dom.signed_distance(P + (mid * self.h)[:, None] * e) > 0
            lo = np.where(inside, mid, lo)
            hi = np.where(inside, hi, mid)
        return 0.5 * (lo + hi)

    def _inner_fraction(self, P, e):
        # smallest s > 0 with |P + s e| = delta
        pe = P @ e
        c = np.einsum("ij,ij->i", P, P) - self.problem.delta**2
        disc = np.sqrt(np.maximum(pe * pe - c, 0.0))
        s = -pe - disc
        return np.clip(s / self.h, 0.0, 1.0)

    def neighbour_values(self, u, k):
        nb = self.nb[k]
        return np.where(nb >= 0, u[np.maximum(nb, 0)], self.bval[k])

    def gradient(self, u):
        uE, uW = self.neighbour_values(u, 0), self.neighbour_values(u, 1)
        uN, uS = self.neighbour_values(u, 2), self.neighbour_values(u, 3)
        hE, hW, hN, hS = self.arm

        def d(up, um, hp, hm):
            return (hm * hm * (up - u) + hp * hp * (u - um)) / (hp * hm * (hp + hm))

        return d(uE, uW, hE, hW), d(uN, uS, hN, hS)

    def assemble(self, a_nodes):
        rows, cols, vals = [], [], []
        diag = np.zeros(self.n)
        rhs = np.zeros(self.n)
        idx = np.arange(self.n)
        for k in range(4):
            nb = self.nb[k]
            inner = nb >= 0
            a_nb = a_nodes[np.maximum(nb, 0)]
            face = np.where(inner, 2.0 * a_nodes * a_nb / (a_nodes + a_nb), a_nodes)
            w = face * self.h / self.arm[k]
            diag += w
            rhs += np.where(inner, 0.0, w * self.bval[k])
            rows.append(idx[inner])
            cols.append(nb[inner])
            vals.append(-w[inner])
        rows.append(idx)
        cols.append(idx)
        vals.append(diag)
        A = sparse.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.n, self.n),
        )
        return A, rhs, diag


@dataclass
class DiscreteField:
    """Nodal solution on the grid plus its boundary data and diagnostics.

    ``values`` has ``nan`` at nodes that are not unknowns.  Boundary "nodes"
    are the exact arm/boundary crossings stored in ``outer_points`` and
    ``inner_points`` together with their Dirichlet values.
    """

    problem: ExcisedProblem
    h: float
    x: np.ndarray
    y: np.ndarray
    unknown: np.ndarray
    values: np.ndarray
    outer_points: np.ndarray
    outer_values: np.ndarray
    inner_points: np.ndarray
    inner_values: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool
    theta: float = THETA
    updates: list = field(default_factory=list, repr=False)

    def node_points(self):
        I, J = np.nonzero(self.unknown)
        return np.stack([self.x[I], self.y[J]], axis=1)

    def node_values(self):
        return self.values[self.unknown]

    def boundary_range(self):
        data = np.concatenate([self.outer_values, self.inner_values])
        return float(data.min()), float(data.max())

    def range_check(self, tol=RANGE_TOL):
        """Discrete maximum principle: nodal values within the boundary data range.

        ``tol`` is relative to the largest boundary value magnitude.
        """
        lo, hi = self.boundary_range()
        scale = max(abs(lo), abs(hi), 1e-300)
        vals = self.node_values()
        if len(vals) == 0:
            return True
        return bool(vals.min() >= lo - tol * scale and vals.max() <= hi + tol * scale)

    def sample(self, points, radius_factor=2.0):
        """Local quadratic least-squares interpolation at ``points``.

        Uses unknown nodes and boundary crossings within
        ``radius_factor * h``; returns ``nan`` where fewer than ten data
        points are available or the point is outside the excised domain.
        """
        return _LocalFit(self, radius_factor)(np.atleast_2d(points))

    def to_rows(self):
        pts = self.node_points()
        return np.column_stack([pts, self.node_values()])


class _LocalFit:
    def __init__(self, fld, radius_factor):
        self.h = fld.h
        self.radius = radius_factor * fld.h
        self.problem = fld.problem
        pts = np.concatenate([fld.node_points(), fld.outer_points, fld.inner_points])
        vals = np.concatenate([fld.node_values(), fld.outer_values, fld.inner_values])
        self.pts, self.vals = pts, vals
        self.tree = cKDTree(pts)

    def __call__(self, targets):
        out = np.full(len(targets), np.nan)
        inside = (self.problem.domain.signed_distance(targets) >= 0) & (
            np.hypot(targets[:, 0], targets[:, 1]) >= self.problem.delta
        )
        neighbours = self.tree.query_ball_point(targets, self.radius)
        for i, (tgt, nbrs) in enumerate(zip(targets, neighbours)):
            if not inside[i] or len(nbrs) < 10:
                continue
            d = (self.pts[nbrs] - tgt) / self.h
            V = np.column_stack(
                [np.ones(len(d)), d[:, 0], d[:, 1], d[:, 0] ** 2, d[:, 0] * d[:, 1], d[:, 1] ** 2]
            )
            coef, _, rank, _ = np.linalg.lstsq(V, self.vals[nbrs], rcond=None)
            if rank == 6:
                out[i] = coef[0]
        return out


def _linear_solve(A, rhs, diag, x0, tol, iteration):
    if len(rhs) == 0 or not np.any(rhs):
        return np.zeros_like(rhs)
    inv = 1.0 / diag
    M = LinearOperator(A.shape, matvec=lambda r: inv * r, dtype=float)
    x, info = cg(A, rhs, x0=x0, rtol=tol, atol=0.0, maxiter=20 * len(rhs) + 1000, M=M)
    if info != 0 or not np.all(np.isfinite(x)):
        raise ConvergenceError(
            f"conjugate gradient failed (info={info}) in Picard iteration {iteration}",
            iteration=iteration,
        )
    return x


def stable_damping(theta, Lambda):
    """Damping actually used by :func:`solve`.

    Linearising one frozen-coefficient step about a power profile gives the
    error factor ``1 - theta * r`` with ``r = 1 + s a'(s)/a(s)`` in
    ``[lambda, Lambda]``.  When ``theta * Lambda >= 2`` the iteration cannot
    contract (p-Laplacians with ``p > 1 + 2/theta`` settle into a 2-cycle), so
    ``1/Lambda`` is used instead.
    """
    if theta * Lambda < 2.0:
        return theta
    return 1.0 / Lambda


def solve(
    problem,
    h,
    theta=THETA,
    picard_tol=PICARD_TOL,
    max_iter=MAX_ITER,
    cg_tol=CG_TOL,
    min_nodes_across=6,
):
    """Damped Picard iteration for the excised, regularised problem.

    Non-convergence after ``max_iter`` steps returns the last iterate with
    ``converged=False``; a failed linear solve raises ``ConvergenceError``.
    """
    h = check_real(h, "h", gt=0.0)
    theta = check_real(theta, "theta", gt=0.0)
    if theta > 1:
        raise ValidationError("theta must lie in (0, 1]")
    max_iter = check_int(max_iter, "max_iter", ge=1)
    if 2.0 * problem.delta / h < min_nodes_across:
        raise ValidationError(
            f"h={h} is too coarse: the excised disk spans {2 * problem.delta / h:.3g} "
            f"nodes, need >= {min_nodes_across}"
        )
    disc = _Discretization(problem, h)
    nl = problem.nl_reg
    theta = stable_damping(theta, nl.Lambda_bound)

    # constant coefficient start: the harmonic function with the same data
    ones = np.ones(disc.n)
    A, rhs, diag = disc.assemble(ones)
    u = _linear_solve(A, rhs, diag, None, cg_tol, 0)
    updates = []
    converged = False
    k = 0
    for k in range(1, max_iter + 1):
        gx, gy = disc.gradient(u)
        a_nodes = nl.a(np.hypot(gx, gy))
        A, rhs, diag = disc.assemble(a_nodes)
        u_tilde = _linear_solve(A, rhs, diag, u, cg_tol, k)
        u_new = (1.0 - theta) * u + theta * u_tilde
        scale = np.max(np.abs(u_new)) if disc.n else 0.0
        change = np.max(np.abs(u_new - u)) if disc.n else 0.0
        update = change / scale if scale > 0 else 0.0
        updates.append(float(update))
        u = u_new
        if update <= picard_tol:
            converged = True
            break

    gx, gy = disc.gradient(u)
    A, rhs, _ = disc.assemble(nl.a(np.hypot(gx, gy)))
    bnorm = np.max(np.abs(rhs)) if disc.n else 0.0
    residual = float(np.max(np.abs(A @ u - rhs)) / bnorm) if bnorm > 0 else 0.0

    values = np.full(disc.shape, np.nan)
    values[disc.unknown] = u
    return DiscreteField(
        problem=problem,
        h=h,
        x=disc.x,
        y=disc.y,
        unknown=disc.unknown,
        values=values,
        outer_points=disc.outer_points,
        outer_values=disc.outer_values,
        inner_points=disc.inner_points,
        inner_values=disc.inner_values,
        residual_norm=residual,
        iterations=k,
        converged=converged,
        theta=theta,
        updates=updates,
    )


@dataclass
class FluxTrace:
    """Outward normal derivative sampled at the outer boundary crossings."""

    arc_position: np.ndarray
    points: np.ndarray
    normals: np.ndarray
    normal_derivative: np.ndarray
    perimeter: float
    dropped: int

    def __len__(self):
        return len(self.arc_position)

    def to_rows(self):
        return np.column_stack([self.arc_position, self.normals, self.normal_derivative])


def boundary_flux(fld):
    """One-sided second-order normal derivative at each outer boundary crossing.

    Values at distances ``h`` and ``2h`` along the inward normal come from
    local quadratic fits; samples whose fit is unavailable are dropped.
    """
    domain = fld.problem.domain
    if len(fld.outer_points) == 0:
        raise FluxExtractionError("field has no outer boundary crossings")
    key = np.round(fld.outer_points / (1e-9 * fld.h)).astype(np.int64)
    _, first = np.unique(key, axis=0, return_index=True)
    first = np.sort(first)
    feet = fld.outer_points[first]
    u0 = fld.outer_values[first]
    feet, normals, arc = domain.closest_point(feet)
    h = fld.h
    fit = _LocalFit(fld, 2.0)
    u1 = fit(feet - h * normals)
    u2 = fit(feet - 2.0 * h * normals)
    ok = np.isfinite(u1) & np.isfinite(u2)
    dropped = int((~ok).sum())
    if dropped > MAX_DROPPED * len(feet):
        raise FluxExtractionError(
            f"{dropped} of {len(feet)} flux samples dropped (> {MAX_DROPPED:.0%})"
        )
    inward = (-3.0 * u0 + 4.0 * u1 - u2) / (2.0 * h)
    order = np.argsort(arc[ok], kind="stable")
    return FluxTrace(
        arc_position=arc[ok][order],
        points=feet[ok][order],
        normals=normals[ok][order],
        normal_derivative=-inward[ok][order],
        perimeter=domain.perimeter,
        dropped=dropped,
    )


@dataclass(frozen=True)
class ConstancyDefect:
    mean_flux: float
    defect: float
    defined: bool


def constancy_defect(trace, perimeter=None):
    """Arc-length weighted mean of the trace and its max relative deviation.

    ``trace`` is a :class:`FluxTrace` or an array of samples (equal weights).
    The defect is undefined (``nan``) when the mean is below ``1e-12``.
    """
    if isinstance(trace, FluxTrace):
        s, f = trace.arc_position, trace.normal_derivative
        perimeter = trace.perimeter if perimeter is None else perimeter
        if len(f) == 0:
            raise ValidationError("empty flux trace")
        if len(f) == 1:
            w = np.ones(1)
        else:
            gaps = np.diff(np.concatenate([s, [s[0] + perimeter]]))
            w = 0.5 * (gaps + np.roll(gaps, 1))
    else:
        f = np.asarray(trace, dtype=float)
        if len(f) == 0:
            raise ValidationError("empty flux trace")
        w = np.ones(len(f))
    mean = float(np.sum(w * f) / np.sum(w))
    if abs(mean) < 1e-12:
        return ConstancyDefect(mean, math.nan, False)
    return ConstancyDefect(mean, float(np.max(np.abs(f - mean)) / abs(mean)), True)


@dataclass(frozen=True)
class BoundaryData:
    """Dirichlet data for a comparison run: constants or callables of points."""

    outer: float | Callable = 0.0
    inner: float | Callable = 1.0

    def _eval(self, which, points):
        g = self.outer if which == "outer" else self.inner
        if callable(g):
            return np.asarray(g(points), dtype=float).reshape(len(points))
        return np.full(len(points), float(g))

    def apply(self, problem):
        def fn(which):
            return lambda pts: self._eval(which, pts)

        return ExcisedProblem(
            problem.domain,
            problem.delta,
            problem.nl_reg,
            inner_value=0.0,
            outer_value=0.0,
            inner_data=fn("inner"),
            outer_data=fn("outer"),
        )


@dataclass(frozen=True)
class ComparisonResult:
    """``holds`` is True/False, or None when a solve did not converge."""

    holds: bool | None
    max_violation: float
    strict: bool
    low: DiscreteField = field(repr=False)
    high: DiscreteField = field(repr=False)

    @property
    def inconclusive(self):
        return self.holds is None

    def __bool__(self):
        return bool(self.holds)


def comparison_check(problem, low, high, h, cmp_tol=1e-10, **solve_kw):
    """Solve with ordered boundary data and check the solutions stay ordered."""
    disc = _Discretization(problem, h)
    for pts in (disc.outer_points, disc.inner_points):
        if len(pts) and np.any(low._eval("outer" if pts is disc.outer_points else "inner", pts)
                               > high._eval("outer" if pts is disc.outer_points else "inner", pts)):
            raise ValidationError("boundary_data_low must not exceed boundary_data_high")
    f_lo = solve(low.apply(problem), h, **solve_kw)
    f_hi = solve(high.apply(problem), h, **solve_kw)
    diff = f_lo.node_values() - f_hi.node_values()
    scale = max(1.0, float(np.max(np.abs(f_hi.node_values()))) if len(diff) else 1.0)
    worst = float(diff.max()) if len(diff) else 0.0
    if not (f_lo.converged and f_hi.converged):
        return ComparisonResult(None, worst, False, f_lo, f_hi)
    holds = worst <= cmp_tol * scale
    return ComparisonResult(bool(holds), worst, bool(holds and worst < 0), f_lo, f_hi)


def harnack_quotient(problem, h, center, radius, fld=None, **solve_kw):
    """``max / min`` of the solution over the nodes of ``B_(radius/2)(center)``.

    The ball ``B_radius(center)`` must lie inside the excised domain.
    Returns ``inf`` when the minimum is below ``1e-14``.
    """
    center = np.asarray(center, dtype=float)
    radius = check_real(radius, "radius", gt=0.0)
    dom = problem.domain
    if dom.signed_distance(center[None, :])[0] < radius or np.hypot(*center) - problem.delta < radius:
        raise ValidationError("B_radius(center) must lie inside the excised domain")
    if fld is None:
        fld = solve(problem, h, **solve_kw)
    pts, vals = fld.node_points(), fld.node_values()
    sel = np.hypot(*(pts - center).T) <= 0.5 * radius
    if not sel.any():
        raise ValidationError("no grid nodes inside the half ball; refine h")
    v = vals[sel]
    if v.min() < -RANGE_TOL * max(1.0, abs(v.max())):
        raise ValidationError("harnack quotient needs a nonnegative field")
    if v.min() < 1e-14:
        return math.inf
    return float(v.max() / v.min())


def reflection_comparison(fld, xi, t):
    """Largest ``u(R x) - u(x)`` over nodes ``x`` right of the plane whose
    reflection lands in the excised domain.

    A discrete look at the ordering between a solution and its reflection;
    interpolation error is of order ``h**3`` so small positive values are
    expected even where the continuum inequality holds.
    """
    xi = as_direction(xi)
    pts, vals = fld.node_points(), fld.node_values()
    right = pts @ xi.vector > t
    refl = reflect_point(xi, t, pts[right])
    mirrored = fld.sample(refl)
    ok = np.isfinite(mirrored)
    if not ok.any():
        return math.nan
    return float(np.max(mirrored[ok] - vals[right][ok]))


def relative_error_vs(fld, profile):
    """``max |u - v(|x|)| / max |v|`` over the unknown nodes.

    ``profile`` is a vectorised callable of the radius or a
    :class:`RadialSolution`.
    """
    pts = fld.node_points()
    r = np.hypot(pts[:, 0], pts[:, 1])
    if isinstance(profile, RadialSolution):
        profile = profile.interpolant(min(fld.problem.delta, r.min()))
    ref = np.asarray(profile(r), dtype=float)
    return float(np.max(np.abs(fld.node_values() - ref)) / np.max(np.abs(ref)))
