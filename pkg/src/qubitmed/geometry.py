"""Geometric primitives on subnormalized Bloch vectors.

Minimal enclosing sphere (move-to-front Welzl), pair hyperbola parameters,
rigid frames that flatten three points into the x-z plane, and translation of
an ensemble's subnormalized vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import (
    CollinearPoints,
    DegenerateAllCoincident,
    IndexOutOfRange,
    NotConstructible,
    ShiftLeavesBall,
)
from .model import Ensemble, EnsembleState, _frozen

Y_AXIS = np.array([0.0, 1.0, 0.0])


# --------------------------------------------------------------------------
# minimal enclosing sphere


@dataclass(frozen=True)
class Circumsphere:
    center_O: np.ndarray
    radius_R: float
    support: tuple[int, ...]


def _ball_through(boundary: list[np.ndarray]) -> tuple[np.ndarray, float] | None:
    """Smallest sphere with every point of ``boundary`` on its surface.

    Returns ``None`` for affinely dependent input (collinear triple, coplanar
    quadruple), where no such sphere exists or it is not unique.
    """
    k = len(boundary)
    if k == 0:
        return np.zeros(3), -1.0
    p0 = boundary[0]
    if k == 1:
        return p0.copy(), 0.0
    # center = p0 + sum_j lam_j (p_j - p0), equidistant from all points
    u = np.array([p - p0 for p in boundary[1:]])
    gram = u @ u.T
    rhs = 0.5 * np.diag(gram)
    if np.linalg.cond(gram) > 1e12:
        return None
    lam = np.linalg.solve(gram, rhs)
    center = p0 + lam @ u
    return center, float(np.linalg.norm(center - p0))


def _enclosing_ball_small(points: list[np.ndarray]) -> tuple[np.ndarray, float]:
    """Minimal ball of at most four points by checking every boundary subset."""
    best = None
    for size in range(1, len(points) + 1):
        for subset in combinations(points, size):
            ball = _ball_through(list(subset))
            if ball is None:
                continue
            c, r = ball
            if all(np.linalg.norm(p - c) <= r * (1 + 1e-12) + 1e-15 for p in points):
                if best is None or r < best[1]:
                    best = (c, r)
    return best


def _contains(ball, p) -> bool:
    c, r = ball
    return r >= 0 and np.linalg.norm(p - c) <= r * (1 + 1e-12) + 1e-14


def _mtf_ball(pts: list[np.ndarray], end: int, boundary: list[np.ndarray]):
    ball = _ball_through(boundary)
    if ball is None:
        ball = _enclosing_ball_small(boundary)
    if len(boundary) == 4:
        return ball
    i = 0
    while i < end:
        p = pts[i]
        if not _contains(ball, p):
            ball = _mtf_ball(pts, i, boundary + [p])
            # move to front
            pts.insert(0, pts.pop(i))
        i += 1
    return ball


def enclosing_ball(points) -> tuple[np.ndarray, float]:
    """Center and radius of the minimal ball containing ``points`` (any count >= 1)."""
    pts = [np.asarray(p, dtype=float) for p in points]
    if not pts:
        raise ValueError("no points")
    return _mtf_ball(list(pts), len(pts), [])


def circumsphere(points, tol: Tolerances = DEFAULT_TOLERANCES) -> Circumsphere:
    """Minimal sphere enclosing ``points``; support lists the points on its surface."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(pts) == 0 or np.max(np.abs(pts - pts[0])) <= 1e-12:
        raise DegenerateAllCoincident("all points coincide")
    center, radius = enclosing_ball(pts)
    dist = np.linalg.norm(pts - center, axis=1)
    support = tuple(int(i) for i in np.flatnonzero(np.abs(dist - radius) <= tol.equality))
    return Circumsphere(_frozen(center), float(radius), support)


# --------------------------------------------------------------------------
# pair hyperbolas


@dataclass(frozen=True)
class HyperbolaPair:
    """Branch ``|v~_m - g| - |v~_l - g| = p_l - p_m`` with foci at the two vectors.

    ``l`` always has the larger (or equal) prior.
    """

    l: int
    m: int
    a: float
    c: float
    b: float
    d_lm: float
    R_lm: float
    e_lm: np.ndarray


def hyperbola_pair(ensemble: Ensemble, l: int, m: int) -> HyperbolaPair:
    n = len(ensemble)
    for idx in (l, m):
        if not 0 <= idx < n:
            raise IndexOutOfRange(f"state index {idx} out of range for {n} states")
    if l == m:
        raise ValueError("a pair needs two distinct indices")
    p = ensemble.priors
    if p[m] > p[l]:
        l, m = m, l
    diff = ensemble.v_tilde[l] - ensemble.v_tilde[m]
    d = float(np.linalg.norm(diff))
    a = 0.5 * (p[l] - p[m])
    c = 0.5 * d
    r_lm = 0.5 * (d - (p[l] - p[m]))
    if r_lm <= 0.0:
        raise NotConstructible(f"pair ({l}, {m}): R = {r_lm!r} <= 0")
    return HyperbolaPair(
        l=l,
        m=m,
        a=float(a),
        c=float(c),
        b=float(np.sqrt(max(c * c - a * a, 0.0))),
        d_lm=d,
        R_lm=float(r_lm),
        e_lm=_frozen(diff / d),
    )


# --------------------------------------------------------------------------
# plane frames


def rotation_to_y(normal) -> np.ndarray:
    """Proper rotation taking the unit vector ``normal`` onto +y (axis-angle form)."""
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    axis = np.cross(n, Y_AXIS)
    s = np.linalg.norm(axis)
    c = float(np.dot(n, Y_AXIS))
    if s < 1e-15:
        if c > 0:
            return np.eye(3)
        # antiparallel: half turn about x
        return np.diag([1.0, -1.0, -1.0])
    k = axis / s
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + s * kx + (1 - c) * (kx @ kx)


def _oriented(normal: np.ndarray) -> np.ndarray:
    # sign convention: +y side first, so planes already parallel to x-z map by identity
    for comp in (normal[1], normal[2], normal[0]):
        if abs(comp) > 1e-15:
            return normal if comp > 0 else -normal
    return normal


@dataclass(frozen=True)
class PlaneFrame:
    """Rigid map ``F(x) = Q (R x - y_offset * e_y)`` into the x-z plane.

    ``in_plane_rotation`` is the 2x2 rotation acting on ``(x, z)``.
    """

    rotation: np.ndarray
    y_offset: float
    in_plane_rotation: np.ndarray
    normal: np.ndarray = field(repr=False)

    @property
    def linear(self) -> np.ndarray:
        """The full 3x3 linear part ``Q R``."""
        q = np.eye(3)
        q[np.ix_([0, 2], [0, 2])] = self.in_plane_rotation
        return q @ self.rotation

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        shifted = x @ self.rotation.T - self.y_offset * Y_AXIS
        q = np.eye(3)
        q[np.ix_([0, 2], [0, 2])] = self.in_plane_rotation
        return shifted @ q.T

    def inverse(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        q = np.eye(3)
        q[np.ix_([0, 2], [0, 2])] = self.in_plane_rotation
        return (y @ q + self.y_offset * Y_AXIS) @ self.rotation

    def rotate(self, x) -> np.ndarray:
        """Apply only the linear part (for directions such as detection vectors)."""
        return np.asarray(x, dtype=float) @ self.linear.T

    def rotate_back(self, y) -> np.ndarray:
        return np.asarray(y, dtype=float) @ self.linear


def _collinear_normal(direction: np.ndarray) -> np.ndarray:
    """Normal of the plane containing ``direction`` that is closest to +y."""
    u = direction / np.linalg.norm(direction)
    for ref in (Y_AXIS, np.array([0.0, 0.0, 1.0])):
        n = ref - np.dot(ref, u) * u
        if np.linalg.norm(n) > 1e-12:
            return n / np.linalg.norm(n)
    raise AssertionError("unreachable")


def plane_frame(points, anchor: int = 0, *, allow_collinear: bool = False) -> PlaneFrame:
    """Frame sending three points into the x-z plane with ``points[anchor]`` on +z.

    Collinear input raises :class:`CollinearPoints` unless ``allow_collinear``
    is set, in which case the containing plane whose normal is closest to +y
    is used.
    """
    pts = np.asarray(points, dtype=float).reshape(3, 3)
    cross = np.cross(pts[1] - pts[0], pts[2] - pts[1])
    area2 = np.linalg.norm(cross)
    if area2 <= 2e-12:
        if not allow_collinear:
            raise CollinearPoints("the three points are collinear")
        spread = pts - pts[0]
        direction = spread[np.argmax(np.linalg.norm(spread, axis=1))]
        if np.linalg.norm(direction) < 1e-15:
            normal = Y_AXIS.copy()
        else:
            normal = _collinear_normal(direction)
    else:
        normal = _oriented(cross / area2)
    rot = rotation_to_y(normal)
    rotated = pts @ rot.T
    y_offset = float(np.mean(rotated[:, 1]))
    x, z = rotated[anchor, 0], rotated[anchor, 2]
    r = np.hypot(x, z)
    if r < 1e-15:
        q2 = np.eye(2)
    else:
        # rotate (x, z) onto (0, r)
        cos, sin = z / r, x / r
        q2 = np.array([[cos, -sin], [sin, cos]])
    return PlaneFrame(_frozen(rot), y_offset, _frozen(q2), _frozen(normal))


# --------------------------------------------------------------------------
# translations


def translate_ensemble(ensemble: Ensemble, shift, tol: Tolerances = DEFAULT_TOLERANCES) -> Ensemble:
    """Shift every subnormalized vector by ``shift`` (Bloch vector by ``shift / p``)."""
    shift = np.asarray(shift, dtype=float)
    states = []
    for i, s in enumerate(ensemble.states):
        if s.prior == 0.0:
            if np.any(shift != 0.0):
                raise ShiftLeavesBall(i, float("inf"))
            states.append(s)
            continue
        v = s.v + shift / s.prior
        norm = float(np.linalg.norm(v))
        if ensemble.strict and norm > 1.0 + tol.ball:
            raise ShiftLeavesBall(i, norm)
        states.append(EnsembleState(s.prior, _frozen(v), _frozen(s.v_tilde + shift), s.label))
    return Ensemble(tuple(states), strict=ensemble.strict)
