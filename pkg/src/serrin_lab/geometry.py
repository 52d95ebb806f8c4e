"""Moving planes for planar domains.

For a unit direction ``xi`` and ``t`` the plane ``{x . xi = t}`` splits a
domain; the part with ``x . xi < t`` (the cap) is reflected by
``x -> 2 (t - x . xi) xi + x``.  ``critical_time`` finds the largest ``t`` up
to which the reflected cap stays inside the domain and classifies how the
reflected boundary touches the original one there.

Containment is decided from boundary samples: the left part of the
boundary is reflected and every image must have signed distance
``>= -contain_tol`` (positive inside).  Samples are placed uniformly in arc
length, with polygon vertices always included and extra points packed
geometrically towards the places where the plane crosses the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from serrin_lab._validation import check_point, check_real, reject_unknown_keys
from serrin_lab.exceptions import GeometryError, ValidationError

DEFAULT_SAMPLES = 4096
CONTAIN_TOL = 1e-11  # relative to the diameter
T_TOL = 1e-10
PLANE_TOL = 1e-6
CLASS_TOL = 1e-5
ORTHO_TOL = 1e-5  # |normal . xi| at a crossing, dimensionless
SYM_TOL = 1e-6
N_SCAN = 64
_REFINE_LEVELS = 30


@dataclass(frozen=True)
class Direction:
    """Unit vector in the plane; normalised on construction."""

    x: float
    y: float

    def __post_init__(self):
        x, y = check_real(self.x, "xi[0]"), check_real(self.y, "xi[1]")
        norm = math.hypot(x, y)
        if norm == 0.0:
            raise ValidationError("direction must be non-zero")
        object.__setattr__(self, "x", x / norm)
        object.__setattr__(self, "y", y / norm)

    @classmethod
    def from_angle(cls, theta):
        return cls(math.cos(theta), math.sin(theta))

    @property
    def vector(self):
        return np.array([self.x, self.y])

    def __neg__(self):
        return Direction(-self.x, -self.y)

    def __iter__(self):
        yield self.x
        yield self.y


def as_direction(xi):
    return xi if isinstance(xi, Direction) else Direction(*xi)


def reflect_point(xi, t, x):
    """``2 (t - x . xi) xi + x``; ``x`` may be a single point or an ``(N, 2)`` array."""
    v = as_direction(xi).vector
    x = np.asarray(x, dtype=float)
    return x + 2.0 * (t - x @ v)[..., None] * v


def reflect_identity_check(xi, t, x, tol=1e-12):
    """Check involution and ``R_t^xi = R_{-t}^{-xi}`` at ``x``."""
    xi = as_direction(xi)
    x = np.asarray(x, dtype=float)
    scale = max(1.0, abs(t), float(np.max(np.abs(x))))
    once = reflect_point(xi, t, x)
    twice = reflect_point(xi, t, once)
    opposite = reflect_point(-xi, -t, x)
    return bool(
        np.max(np.abs(twice - x)) <= tol * scale
        and np.max(np.abs(opposite - once)) <= tol * scale
    )


class PlanarDomain:
    """Bounded simply connected planar domain described by its boundary.

    Subclasses provide a parametrisation ``point_at(u)``, ``u`` in ``[0, 1)``,
    running counterclockwise, together with exact signed distances.
    """

    kind = "abstract"
    # polygons are only C^0; results on them carry a note
    smooth = True

    def __init__(self):
        self.diameter = self._diameter()
        self.contains_origin = bool(self.signed_distance(np.zeros((1, 2)))[0] > 0)
        self._arc_u, self._arc_s = self._arc_table()
        self.perimeter = float(self._arc_s[-1])

    # --- geometry primitives -------------------------------------------------
    def point_at(self, u):
        raise NotImplementedError

    def normal_at(self, u):
        raise NotImplementedError

    def signed_distance(self, points):
        raise NotImplementedError

    def closest_point(self, points):
        """Return ``(foot_points, outward_normals, arc_positions)``."""
        raise NotImplementedError

    def support(self, xi):
        """``(min, max)`` of ``x . xi`` over the closed domain."""
        raise NotImplementedError

    def _diameter(self):
        raise NotImplementedError

    def vertex_params(self):
        return np.empty(0)

    @property
    def centroid(self):
        return self.center

    def to_config(self):
        raise NotImplementedError

    # --- derived helpers ----------------------------------------------------
    def within(self, points, tol):
        """True iff every point has signed distance >= -tol."""
        return bool(np.min(self.signed_distance(points)) >= -tol)

    def contains(self, points):
        return self.signed_distance(np.atleast_2d(points)) > 0

    def _arc_table(self, n=16384):
        u = np.linspace(0.0, 1.0, n + 1)
        pts = self.point_at(u)
        seg = np.hypot(*np.diff(pts, axis=0).T)
        return u, np.concatenate([[0.0], np.cumsum(seg)])

    def arc_to_param(self, s):
        return np.interp(s, self._arc_s, self._arc_u)

    def param_to_arc(self, u):
        return np.interp(np.mod(u, 1.0), self._arc_u, self._arc_s)

    def sample_params(self, n=DEFAULT_SAMPLES):
        """Params uniform in arc length, merged with the vertex params."""
        s = np.arange(n) * (self.perimeter / n)
        u = np.concatenate([self.arc_to_param(s), self.vertex_params()])
        return np.unique(np.mod(u, 1.0))

    def distance_to_origin_boundary(self):
        """``dist(O, boundary)`` for domains containing the origin."""
        return float(self.signed_distance(np.zeros((1, 2)))[0])


class Circle(PlanarDomain):
    kind = "circle"

    def __init__(self, center=(0.0, 0.0), radius=1.0):
        self.center = np.array(check_point(center, "center"))
        self.radius = check_real(radius, "radius", gt=0.0)
        super().__init__()

    def point_at(self, u):
        th = 2.0 * np.pi * np.asarray(u, dtype=float)
        return self.center + self.radius * np.stack([np.cos(th), np.sin(th)], axis=-1)

    def normal_at(self, u):
        th = 2.0 * np.pi * np.asarray(u, dtype=float)
        return np.stack([np.cos(th), np.sin(th)], axis=-1)

    def signed_distance(self, points):
        d = np.asarray(points, dtype=float) - self.center
        return self.radius - np.hypot(d[..., 0], d[..., 1])

    def closest_point(self, points):
        d = np.asarray(points, dtype=float) - self.center
        r = np.hypot(d[..., 0], d[..., 1])
        normal = d / np.where(r > 0, r, 1.0)[..., None]
        theta = np.mod(np.arctan2(d[..., 1], d[..., 0]), 2 * np.pi)
        return self.center + self.radius * normal, normal, self.radius * theta

    def support(self, xi):
        v = as_direction(xi).vector
        m = float(self.center @ v)
        return m - self.radius, m + self.radius

    def _diameter(self):
        return 2.0 * self.radius

    def _arc_table(self, n=16384):
        return np.array([0.0, 1.0]), np.array([0.0, 2 * np.pi * self.radius])

    def to_config(self):
        return {"kind": "circle", "center": self.center.tolist(), "radius": self.radius}

    def __repr__(self):
        return f"Circle(center={tuple(self.center)}, radius={self.radius})"


def _ellipse_foot(y0, y1, a, b):
    """Closest point on ``x^2/a^2 + y^2/b^2 = 1`` (``a >= b``) to ``(y0, y1)``
    with ``y0, y1 >= 0``.  Safeguarded Newton on the Lagrange multiplier."""
    y0 = np.asarray(y0, dtype=float)
    y1 = np.asarray(y1, dtype=float)
    x0 = np.empty_like(y0)
    x1 = np.empty_like(y1)

    on_axis = y1 == 0.0
    # points on the major axis (Eberly's special case)
    if on_axis.any():
        z = y0[on_axis]
        den = a * a - b * b
        inner = (den > 0) & (z < den / a)
        xa = np.where(inner, a * a * z / np.where(den > 0, den, 1.0), a)
        ya = np.where(inner, b * np.sqrt(np.clip(1.0 - (xa / a) ** 2, 0.0, None)), 0.0)
        x0[on_axis], x1[on_axis] = xa, ya

    gen = ~on_axis
    if gen.any():
        p, q = a * y0[gen], b * y1[gen]
        aa, bb = a * a, b * b
        # unknown s = t + b^2 > 0; G(s) = (p/(s + aa - bb))^2 + (q/s)^2 - 1
        lo = q.copy()
        hi = np.hypot(p, q)
        s = hi.copy()
        shift = aa - bb
        for _ in range(100):
            r0 = p / (s + shift)
            r1 = q / s
            g = r0 * r0 + r1 * r1 - 1.0
            lo = np.where(g > 0, s, lo)
            hi = np.where(g < 0, s, hi)
            dg = -2.0 * (r0 * r0 / (s + shift) + r1 * r1 / s)
            step = np.where(dg != 0, g / dg, 0.0)
            s_new = s - step
            bad = ~((s_new > lo) & (s_new < hi))
            s_new = np.where(bad, np.sqrt(lo * hi), s_new)
            done = np.abs(s_new - s) <= 1e-15 * s
            s = np.where(g == 0, s, s_new)
            if np.all(done | (g == 0)):
                break
        t = s - bb
        x0[gen] = aa * y0[gen] / (t + aa)
        x1[gen] = bb * y1[gen] / (t + bb)
    return x0, x1


class Ellipse(PlanarDomain):
    kind = "ellipse"

    def __init__(self, center=(0.0, 0.0), semi_axes=(2.0, 1.0), rotation=0.0):
        self.center = np.array(check_point(center, "center"))
        sa, sb = check_point(semi_axes, "semi_axes")
        if sa <= 0 or sb <= 0:
            raise ValidationError("semi_axes must be positive")
        self.semi_axes = (sa, sb)
        self.rotation = check_real(rotation, "rotation")
        c, s = math.cos(self.rotation), math.sin(self.rotation)
        self._rot = np.array([[c, -s], [s, c]])
        super().__init__()

    def _local(self, points):
        return (np.asarray(points, dtype=float) - self.center) @ self._rot

    def _global(self, local):
        return local @ self._rot.T + self.center

    def point_at(self, u):
        th = 2.0 * np.pi * np.asarray(u, dtype=float)
        a, b = self.semi_axes
        return self._global(np.stack([a * np.cos(th), b * np.sin(th)], axis=-1))

    def normal_at(self, u):
        th = 2.0 * np.pi * np.asarray(u, dtype=float)
        a, b = self.semi_axes
        n = np.stack([b * np.cos(th), a * np.sin(th)], axis=-1)
        n = n / np.hypot(n[..., 0], n[..., 1])[..., None]
        return n @ self._rot.T

    def _foot_local(self, q):
        """Closest boundary point in local coordinates, handling ``a < b``."""
        a, b = self.semi_axes
        qx, qy = q[..., 0], q[..., 1]
        if a >= b:
            f0, f1 = _ellipse_foot(np.abs(qx), np.abs(qy), a, b)
        else:
            f1, f0 = _ellipse_foot(np.abs(qy), np.abs(qx), b, a)
        return np.stack([np.copysign(f0, qx), np.copysign(f1, qy)], axis=-1)

    def signed_distance(self, points):
        q = self._local(points)
        a, b = self.semi_axes
        foot = self._foot_local(q)
        dist = np.hypot(*(q - foot).T) if q.ndim == 2 else np.hypot(*(q - foot))
        inside = (q[..., 0] / a) ** 2 + (q[..., 1] / b) ** 2 < 1.0
        return np.where(inside, dist, -dist)

    def within(self, points, tol):
        q = self._local(np.atleast_2d(points))
        a, b = self.semi_axes
        outside = (q[:, 0] / a) ** 2 + (q[:, 1] / b) ** 2 >= 1.0
        if not outside.any():
            return True
        q = q[outside]
        return bool(np.max(np.hypot(*(q - self._foot_local(q)).T)) <= tol)

    def closest_point(self, points):
        q = self._local(points)
        a, b = self.semi_axes
        foot = self._foot_local(q)
        theta = np.mod(np.arctan2(foot[..., 1] / b, foot[..., 0] / a), 2 * np.pi)
        u = theta / (2 * np.pi)
        return self._global(foot), self.normal_at(u), self.param_to_arc(u)

    def support(self, xi):
        v = as_direction(xi).vector
        w = self._rot.T @ v
        a, b = self.semi_axes
        half = math.hypot(a * w[0], b * w[1])
        m = float(self.center @ v)
        return m - half, m + half

    def _diameter(self):
        return 2.0 * max(self.semi_axes)

    def to_config(self):
        return {
            "kind": "ellipse",
            "center": self.center.tolist(),
            "semi_axes": list(self.semi_axes),
            "rotation": self.rotation,
        }

    def __repr__(self):
        return (
            f"Ellipse(center={tuple(self.center)}, semi_axes={self.semi_axes}, "
            f"rotation={self.rotation})"
        )


def _segments_intersect(p1, p2, q1, q2):
    def orient(a, b, c):
        return np.sign((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))

    return orient(p1, p2, q1) * orient(p1, p2, q2) < 0 and orient(q1, q2, p1) * orient(
        q1, q2, p2
    ) < 0


class Polygon(PlanarDomain):
    """Simple polygon with counterclockwise vertices (not repeated at the end)."""

    kind = "polygon"
    smooth = False

    def __init__(self, vertices):
        try:
            v = np.array(vertices, dtype=float)
        except (TypeError, ValueError):
            raise ValidationError("vertices must be a list of [x, y] pairs") from None
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise ValidationError("a polygon needs at least 3 vertices [x, y]")
        if not np.all(np.isfinite(v)):
            raise ValidationError("polygon vertices must be finite")
        if np.allclose(v[0], v[-1]):
            v = v[:-1]
        area2 = np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1])
        if area2 <= 0:
            raise ValidationError("polygon vertices must be counterclockwise")
        m = len(v)
        for i in range(m):
            for j in range(i + 2, m):
                if i == 0 and j == m - 1:
                    continue
                if _segments_intersect(v[i], v[(i + 1) % m], v[j], v[(j + 1) % m]):
                    raise ValidationError("polygon is self-intersecting")
        self.vertices = v
        self._a = v
        self._b = np.roll(v, -1, axis=0)
        edge = self._b - self._a
        self._len = np.hypot(edge[:, 0], edge[:, 1])
        if np.any(self._len == 0):
            raise ValidationError("polygon has repeated vertices")
        self._cum = np.concatenate([[0.0], np.cumsum(self._len)])
        self._tangent = edge / self._len[:, None]
        self._normal = np.stack([self._tangent[:, 1], -self._tangent[:, 0]], axis=1)
        super().__init__()

    def _arc_table(self, n=16384):
        return self._cum / self._cum[-1], self._cum.copy()

    def vertex_params(self):
        return self._cum[:-1] / self._cum[-1]

    @property
    def centroid(self):
        x, y = self._a.T
        xn, yn = self._b.T
        cross = x * yn - xn * y
        area = 0.5 * cross.sum()
        return np.array([((x + xn) * cross).sum(), ((y + yn) * cross).sum()]) / (6 * area)

    def _edge_of(self, u):
        s = np.mod(np.asarray(u, dtype=float), 1.0) * self._cum[-1]
        k = np.clip(np.searchsorted(self._cum, s, side="right") - 1, 0, len(self._len) - 1)
        return k, s - self._cum[k]

    def point_at(self, u):
        k, off = self._edge_of(u)
        return self._a[k] + off[..., None] * self._tangent[k]

    def normal_at(self, u):
        k, _ = self._edge_of(u)
        return self._normal[k]

    def _project(self, points):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        rel = p[:, None, :] - self._a[None, :, :]
        along = np.einsum("nmk,mk->nm", rel, self._tangent)
        along = np.clip(along, 0.0, self._len[None, :])
        foot = self._a[None, :, :] + along[..., None] * self._tangent[None, :, :]
        dist = np.hypot(*(p[:, None, :] - foot).transpose(2, 0, 1))
        k = np.argmin(dist, axis=1)
        idx = np.arange(len(p))
        return p, foot[idx, k], dist[idx, k], k, along[idx, k]

    def _winding_inside(self, p):
        ax, ay = self._a[:, 0][None, :], self._a[:, 1][None, :]
        bx, by = self._b[:, 0][None, :], self._b[:, 1][None, :]
        px, py = p[:, 0][:, None], p[:, 1][:, None]
        cross = (bx - ax) * (py - ay) - (px - ax) * (by - ay)
        up = (ay <= py) & (by > py) & (cross > 0)
        down = (ay > py) & (by <= py) & (cross < 0)
        winding = up.sum(axis=1) - down.sum(axis=1)
        return winding != 0

    def within(self, points, tol):
        # only points failing the exact inside test need a distance
        p = np.atleast_2d(np.asarray(points, dtype=float))
        inside = self._winding_inside(p)
        if inside.all():
            return True
        return bool(np.max(self._project(p[~inside])[2]) <= tol)

    def signed_distance(self, points):
        p, _, dist, _, _ = self._project(points)
        out = np.where(self._winding_inside(p), dist, -dist)
        return out.reshape(np.shape(points)[:-1])

    def closest_point(self, points):
        p, foot, _, k, along = self._project(points)
        return foot, self._normal[k], self._cum[k] + along

    def support(self, xi):
        proj = self.vertices @ as_direction(xi).vector
        return float(proj.min()), float(proj.max())

    def _diameter(self):
        d = self.vertices[:, None, :] - self.vertices[None, :, :]
        return float(np.max(np.hypot(d[..., 0], d[..., 1])))

    def to_config(self):
        return {"kind": "polygon", "vertices": self.vertices.tolist()}

    def __repr__(self):
        return f"Polygon({len(self.vertices)} vertices)"


def domain_from_config(config):
    if not isinstance(config, dict):
        raise ValidationError("domain config must be a JSON object")
    kind = config.get("kind")
    if kind == "circle":
        reject_unknown_keys(config, {"kind", "center", "radius"}, "circle domain")
        return Circle(config.get("center", (0.0, 0.0)), config.get("radius", 1.0))
    if kind == "ellipse":
        reject_unknown_keys(
            config, {"kind", "center", "semi_axes", "rotation"}, "ellipse domain"
        )
        if "semi_axes" not in config:
            raise ValidationError("ellipse domain needs 'semi_axes'")
        return Ellipse(
            config.get("center", (0.0, 0.0)), config["semi_axes"], config.get("rotation", 0.0)
        )
    if kind == "polygon":
        reject_unknown_keys(config, {"kind", "vertices"}, "polygon domain")
        if "vertices" not in config:
            raise ValidationError("polygon domain needs 'vertices'")
        return Polygon(config["vertices"])
    raise ValidationError(f"unknown domain kind {kind!r}")


# --- moving plane engine -----------------------------------------------------


class _BoundarySampler:
    """Cached boundary samples of one domain for a fixed direction."""

    def __init__(self, domain, xi, n_samples):
        self.domain = domain
        self.xi = as_direction(xi)
        self.v = self.xi.vector
        self.u = domain.sample_params(n_samples)
        self.points = domain.point_at(self.u)
        self.proj = self.points @ self.v
        self.du = 1.0 / len(self.u)

    def crossings(self, t):
        """Params where the boundary crosses ``x . xi = t``."""
        f = self.proj - t
        g = np.roll(f, -1)
        idx = np.nonzero((f < 0) != (g < 0))[0]
        if len(idx) == 0:
            return np.empty(0)
        lo = self.u[idx]
        hi = np.where(idx + 1 < len(self.u), self.u[(idx + 1) % len(self.u)], 1.0 + self.u[0])
        f_lo, f_hi = f[idx], g[idx]
        # Illinois regula falsi; exact in one step on polygon edges
        best, best_f = lo.copy(), np.abs(f_lo)
        side = np.zeros(len(idx), dtype=int)
        tol = 4.0 * np.finfo(float).eps * (1.0 + abs(t) + np.max(np.abs(self.proj)))
        for _ in range(60):
            denom = f_hi - f_lo
            m = np.where(denom != 0, hi - f_hi * (hi - lo) / np.where(denom != 0, denom, 1.0), 0.5 * (lo + hi))
            bad = ~((m > lo) & (m < hi))
            m = np.where(bad, 0.5 * (lo + hi), m)
            fm = self.domain.point_at(np.mod(m, 1.0)) @ self.v - t
            better = np.abs(fm) < best_f
            best = np.where(better, m, best)
            best_f = np.where(better, np.abs(fm), best_f)
            if np.all(best_f <= tol):
                break
            same = (fm < 0) == (f_lo < 0)
            # halve the stale endpoint value when the same side is kept twice
            f_hi = np.where(same & (side == 1), 0.5 * f_hi, f_hi)
            f_lo = np.where(~same & (side == -1), 0.5 * f_lo, f_lo)
            lo, f_lo = np.where(same, m, lo), np.where(same, fm, f_lo)
            hi, f_hi = np.where(same, hi, m), np.where(same, f_hi, fm)
            side = np.where(same, 1, -1)
        return np.mod(best, 1.0)

    def left_samples(self, t):
        """Boundary points strictly left of the plane, with their params.

        Includes geometric refinements towards each crossing so that
        contacts right at the plane are resolved.
        """
        keep = self.proj < t
        u_cross = self.crossings(t)
        if len(u_cross):
            offsets = self.du * 2.0 ** -np.arange(_REFINE_LEVELS)
            extra = (u_cross[:, None, None] + np.array([-1.0, 1.0])[None, :, None] * offsets).ravel()
            extra = np.mod(extra, 1.0)
            pts = self.domain.point_at(extra)
            ek = pts @ self.v < t
            u = np.concatenate([self.u[keep], extra[ek]])
            p = np.concatenate([self.points[keep], pts[ek]])
        else:
            u, p = self.u[keep], self.points[keep]
        return u, p, u_cross

    def clearance(self, t):
        """Signed distances of the reflected left samples (and the samples)."""
        u, p, u_cross = self.left_samples(t)
        if len(p) == 0:
            return u, p, np.empty((0, 2)), np.empty(0), u_cross
        refl = reflect_point(self.xi, t, p)
        return u, p, refl, self.domain.signed_distance(refl), u_cross

    def contained(self, t, tol):
        _, p, _ = self.left_samples(t)
        return len(p) == 0 or self.domain.within(reflect_point(self.xi, t, p), tol)


@dataclass
class CriticalReflection:
    """Result of sweeping the plane with normal ``xi`` to its critical position.

    ``case`` is ``"I"`` (contact away from the plane), ``"II"`` (contact on
    the plane, where the boundary meets it orthogonally) or ``"unresolved"``.
    ``gap`` is the residual clearance of the best contact candidate.
    """

    xi: Direction
    t_critical: float
    case: str
    contact: tuple | None
    gap: float
    cap: np.ndarray = field(repr=False)
    multiple_contacts: bool = False
    vertex_contact: bool = False
    notes: tuple = ()


def _contact_runs(mask):
    """Number of contiguous runs of True in a circular 1D mask."""
    if mask.all():
        return 1
    return int(np.sum(mask & ~np.roll(mask, 1)))


def _corner_on_plane(domain, v, t, plane_tol):
    if domain.smooth:
        return None
    on_plane = np.abs(domain.vertices @ v - t) <= plane_tol
    if not on_plane.any():
        return None
    return domain.vertices[np.nonzero(on_plane)[0][0]]


def _classify(sampler, t, scale):
    domain = sampler.domain
    keep = sampler.proj < t
    base_c = np.full(len(sampler.u), np.inf)
    refl_base = reflect_point(sampler.xi, t, sampler.points[keep])
    if len(refl_base):
        base_c[keep] = domain.signed_distance(refl_base)
    d_base = t - sampler.proj
    _, _, refl, c_all, u_cross = sampler.clearance(t)

    plane_tol = PLANE_TOL * scale
    class_tol = CLASS_TOL * scale
    notes = () if domain.smooth else ("polygon boundary is only C^0",)

    ortho = np.inf
    cross_pt = None
    if len(u_cross):
        dots = np.abs(domain.normal_at(u_cross) @ sampler.v)
        j = int(np.argmin(dots))
        ortho = float(dots[j])
        cross_pt = domain.point_at(u_cross[j])

    left = keep
    symmetric = bool(left.any()) and bool(np.all(base_c[left] <= class_tol))

    # interior local minima of the clearance along the boundary, away from the plane
    prev_c, next_c = np.roll(base_c, 1), np.roll(base_c, -1)
    interior = left & np.roll(left, 1) & np.roll(left, -1)
    local_min = interior & (base_c <= prev_c) & (base_c <= next_c)
    cand = local_min & (base_c <= class_tol) & (d_base > plane_tol)

    # exact coincidences (flat edges, symmetric arcs) give a continuum of contacts
    touching = left & (base_c <= 10.0 * CONTAIN_TOL * scale) & (d_base > plane_tol)
    multiple = _contact_runs(touching) > 1 or int(touching.sum()) > 2

    vertex_contact = False

    def near_vertex(pt):
        if domain.smooth or pt is None:
            return False
        return bool(np.min(np.hypot(*(domain.vertices - pt).T)) <= plane_tol)

    if symmetric and ortho <= ORTHO_TOL:
        case, contact, gap = "II", cross_pt, 0.0
    elif cand.any():
        idx = np.nonzero(cand)[0]
        order = np.lexsort((-d_base[idx], base_c[idx]))
        i = idx[order[0]]
        contact = reflect_point(sampler.xi, t, sampler.points[i])
        case, gap = "I", float(max(base_c[i], 0.0))
    elif ortho <= ORTHO_TOL:
        case, contact, gap = "II", cross_pt, 0.0
    elif (corner := _corner_on_plane(domain, sampler.v, t, plane_tol)) is not None:
        # normal undefined at a corner: the distance rule alone decides
        case, contact, gap = "II", corner, 0.0
        notes = notes + ("contact at a corner on the plane",)
    else:
        case, contact = "unresolved", None
        gap = float(np.min(base_c[left & (d_base > plane_tol)])) if left.any() else math.inf
    if contact is not None:
        vertex_contact = near_vertex(np.asarray(contact))
        contact = (float(contact[0]), float(contact[1]))
    # distance check backing the case labels
    if case == "I" and abs(float(np.dot(contact, sampler.v)) - t) <= plane_tol:
        raise GeometryError("case I contact lies on the plane")
    return case, contact, gap, refl, multiple, vertex_contact, notes


def critical_time(domain, xi, n_samples=DEFAULT_SAMPLES, t_tol=None, contain_tol=None):
    """Critical position ``t(xi)`` of the moving plane, with tangency data.

    A coarse scan upward from the support minimum finds the first ``t``
    where containment fails; bisection then narrows the transition to
    ``t_tol`` (default ``1e-10 * diameter``).  The returned ``t_critical``
    is the contained end of the final bracket.
    """
    xi = as_direction(xi)
    scale = domain.diameter
    t_tol = T_TOL * scale if t_tol is None else t_tol
    contain_tol = CONTAIN_TOL * scale if contain_tol is None else contain_tol
    sampler = _BoundarySampler(domain, xi, n_samples)
    t_lo, t_end = domain.support(xi)
    step = (t_end - t_lo) / N_SCAN
    t_hi = t_end
    for k in range(1, N_SCAN):
        t = t_lo + k * step if k < N_SCAN else t_end
        if sampler.contained(t, contain_tol):
            t_lo = t
        else:
            t_hi = t
            break
    while t_hi - t_lo > t_tol:
        mid = 0.5 * (t_lo + t_hi)
        if sampler.contained(mid, contain_tol):
            t_lo = mid
        else:
            t_hi = mid
    case, contact, gap, cap, multiple, vertex, notes = _classify(sampler, t_lo, scale)
    return CriticalReflection(
        xi=xi,
        t_critical=t_lo,
        case=case,
        contact=contact,
        gap=gap,
        cap=cap,
        multiple_contacts=multiple,
        vertex_contact=vertex,
        notes=notes,
    )


def cap_contained(domain, xi, t, n_samples=DEFAULT_SAMPLES, contain_tol=None):
    """Whether the reflection of ``domain & {x . xi < t}`` lies inside the domain.

    An empty cap counts as contained.
    """
    contain_tol = CONTAIN_TOL * domain.diameter if contain_tol is None else contain_tol
    return _BoundarySampler(domain, xi, n_samples).contained(t, contain_tol)


@dataclass(frozen=True)
class SerrinSum:
    t_plus: float
    t_minus: float
    sum: float


def serrin_inequality(domain, xi, n_samples=DEFAULT_SAMPLES, t_tol=None):
    """``t(xi)``, ``t(-xi)`` and their sum, which can never be positive.

    A sum above ``2 * t_tol`` is an engine defect and raises ``GeometryError``.
    """
    xi = as_direction(xi)
    t_tol = T_TOL * domain.diameter if t_tol is None else t_tol
    tp = critical_time(domain, xi, n_samples, t_tol=t_tol).t_critical
    tm = critical_time(domain, -xi, n_samples, t_tol=t_tol).t_critical
    total = tp + tm
    if total > 2.0 * t_tol:
        raise GeometryError(
            f"t(xi) + t(-xi) = {total!r} > 0 for xi={tuple(xi)} on {domain!r}"
        )
    return SerrinSum(tp, tm, total)


@dataclass(frozen=True)
class SweepEntry:
    """One direction of a symmetry sweep.

    ``via`` records which test established symmetry: ``"moving_plane"``
    when ``t(xi) + t(-xi)`` vanishes, ``"centroid"`` when the plane through
    the centroid is a mirror although the moving plane stopped early (this
    happens for non-convex domains), ``""`` when not symmetric.
    """

    xi: Direction
    t_plus: float
    t_minus: float
    sum: float
    is_symmetric: bool
    via: str
    reflection: CriticalReflection = field(repr=False, compare=False)


def _two_sided_clearance(domain, xi, t, n_samples):
    """Worst clearance when either side of the plane is reflected onto the other."""
    sampler = _BoundarySampler(domain, xi, n_samples)
    worst = math.inf
    for sign in (1.0, -1.0):
        side = sampler.proj < t if sign > 0 else sampler.proj > t
        if side.any():
            refl = reflect_point(xi, t, sampler.points[side])
            worst = min(worst, float(domain.signed_distance(refl).min()))
    return worst


def direction_sweep(n_directions):
    return [Direction.from_angle(2.0 * math.pi * k / n_directions) for k in range(n_directions)]


def symmetry_planes(domain, n_directions=64, n_samples=DEFAULT_SAMPLES, sym_tol=None, workers=1):
    """Sweep equally spaced directions and mark planes of symmetry.

    ``xi`` is symmetric when ``t(xi) + t(-xi) >= -sym_tol`` and reflecting
    either side across the mid plane lands inside the domain up to
    ``sym_tol`` (default ``1e-6 * diameter``).
    """
    if n_directions < 4:
        raise ValidationError("n_directions must be >= 4")
    sym_tol = SYM_TOL * domain.diameter if sym_tol is None else sym_tol
    dirs = direction_sweep(n_directions)
    even = n_directions % 2 == 0
    todo = dirs if even else dirs + [-d for d in dirs]

    def job(d):
        return critical_time(domain, d, n_samples)

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, todo))
    else:
        results = [job(d) for d in todo]

    out = []
    for k, d in enumerate(dirs):
        plus = results[k]
        minus = results[(k + n_directions // 2) % n_directions] if even else results[n_directions + k]
        total = plus.t_critical + minus.t_critical
        via = ""
        if total >= -sym_tol:
            mid = 0.5 * (plus.t_critical - minus.t_critical)
            if _two_sided_clearance(domain, d, mid, n_samples) >= -sym_tol:
                via = "moving_plane"
        else:
            # every mirror line passes through the centroid
            mid = float(domain.centroid @ d.vector)
            if _two_sided_clearance(domain, d, mid, n_samples) >= -sym_tol:
                via = "centroid"
        out.append(SweepEntry(d, plus.t_critical, minus.t_critical, total, bool(via), via, plus))
    return out


def is_centered_disk(domain, tol=1e-9):
    """True iff the boundary is a circle centred at the origin (relative ``tol``)."""
    if isinstance(domain, Circle):
        return bool(np.hypot(*domain.center) <= tol * domain.diameter)
    r = np.hypot(*domain.point_at(domain.sample_params(1024)).T)
    return bool(r.max() - r.min() <= tol * domain.diameter)
