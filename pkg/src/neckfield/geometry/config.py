"""Validated multi-conductor scenes and the four canonical builders.

Case layouts (all centers on the x-axis, gap between the first pair
straddling the origin):

  A: disk D1 against a lens D2 (small disk protruding from a large one)
  B: three disjoint disks, a small one in the middle
  C: like A but with a general smooth left body
  D: three disjoint smooth bodies, a small one in the middle

The rate laws behind these layouts are asymptotic in ``eps << r2 << r1 ~ r3``;
violating that regime only emits :class:`ScaleRegimeWarning`, never an error,
so sweeps can traverse the crossover.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..errors import (InvalidGeometryError, InvalidParameterError,
                      ScaleRegimeWarning)
from .body import Body
from .gap import GapInfo, body_gap, gap
from .shapes import Disk, HarmonicBackground, SmoothBoundary


@dataclass(frozen=True)
class Configuration:
    """An ordered list of bodies partitioned into equipotential conductors,
    plus the applied harmonic background."""

    bodies: tuple[Body, ...]
    groups: tuple[tuple[int, ...], ...]
    background: HarmonicBackground
    case_tag: str = "free"
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.bodies) == 0:
            raise InvalidParameterError("configuration needs at least one body")
        seen = sorted(i for g in self.groups for i in g)
        if seen != list(range(len(self.bodies))):
            raise InvalidParameterError("groups must partition the body indices")
        # conductor closures pairwise disjoint: every body pair has a
        # positive gap (raises InvalidGeometryError through GapInfo if not)
        for a in range(len(self.bodies)):
            for b in range(a + 1, len(self.bodies)):
                body_gap(self.bodies[a], self.bodies[b])

    @property
    def n_conductors(self) -> int:
        return len(self.groups)

    def conductor_gap(self, i: int, j: int) -> GapInfo:
        return gap(self, i, j)

    def all_conductor_gaps(self) -> dict[tuple[int, int], GapInfo]:
        out = {}
        for i in range(self.n_conductors):
            for j in range(i + 1, self.n_conductors):
                out[(i, j)] = gap(self, i, j)
        return out

    def body_group(self, body_index: int) -> int:
        for g, members in enumerate(self.groups):
            if body_index in members:
                return g
        raise InvalidParameterError(f"body {body_index} not in any group")

    def translated(self, v) -> "Configuration":
        """Translate the scene; the background is re-expanded about the new
        origin so the physical field is unchanged."""
        return Configuration(tuple(b.translated(v) for b in self.bodies),
                             self.groups, self.background.shifted(v),
                             self.case_tag, dict(self.params))

    def mirrored_x(self) -> "Configuration":
        return Configuration(tuple(b.mirrored_x() for b in self.bodies),
                             self.groups, self.background, self.case_tag,
                             dict(self.params))

    def regrouped(self, groups: Sequence[Sequence[int]]) -> "Configuration":
        return Configuration(self.bodies, tuple(tuple(g) for g in groups),
                             self.background, self.case_tag, dict(self.params))

    def exterior_mask(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        inside = np.zeros(pts.shape[0], dtype=bool)
        for b in self.bodies:
            inside |= b.contains(pts)
        return ~inside

    def scene_radius(self) -> float:
        r = 0.0
        for b in self.bodies:
            c, br = b.bounding_circle()
            r = max(r, float(np.hypot(*c)) + br)
        return r


def _check_positive(**kwargs) -> None:
    for name, v in kwargs.items():
        if not (np.isfinite(v) and v > 0):
            raise InvalidParameterError(f"{name} must be a positive finite length, got {v!r}")


def _regime_warnings(eps_list, r2, r_outer) -> None:
    r_lo, r_hi = min(r_outer), max(r_outer)
    if any(e > 0.2 * r2 for e in eps_list):
        warnings.warn("gap is not small against the middle radius (eps << r2 violated)",
                      ScaleRegimeWarning, stacklevel=3)
    if r2 > 0.2 * r_lo:
        warnings.warn("middle radius is not small against the outer radii (r2 << r1, r3 violated)",
                      ScaleRegimeWarning, stacklevel=3)
    if r_hi > 2.5 * r_lo:
        warnings.warn("outer radii are not comparable (r1 ~ r3 violated)",
                      ScaleRegimeWarning, stacklevel=3)


def build_case_a(r1: float, r2: float, r3: float, a: float, eps: float,
                 background: Optional[HarmonicBackground] = None) -> Configuration:
    """Disk of radius r1 facing, across a gap eps, a lens made of a small
    disk (radius r2) protruding by overlap parameter ``a`` from a large disk
    (radius r3). Centers are collinear on the x-axis and the gap straddles
    the origin.

    The outer-pair separation dist(D1, B_r3) ~ r2 is a consequence of
    0 < a < 2 r2 for these centers, so it is not enforced separately.
    """
    _check_positive(r1=r1, r2=r2, r3=r3, eps=eps)
    if not (0 < a < 2 * r2):
        raise InvalidGeometryError(f"overlap parameter must satisfy 0 < a < 2*r2, got a={a!r}")
    c1 = Disk((-r1 - eps / 2, 0.0), r1)
    c2 = Disk((r2 + eps / 2, 0.0), r2)
    c3 = Disk((r3 + a + eps / 2, 0.0), r3)
    _regime_warnings([eps], r2, (r1, r3))
    return Configuration(
        bodies=(Body.from_disk(c1), Body.lens(c2, c3)),
        groups=((0,), (1,)),
        background=background or HarmonicBackground.linear_x(),
        case_tag="A",
        params={"r1": r1, "r2": r2, "r3": r3, "a": a, "eps": eps},
    )


def build_two_disks(r1: float, r2: float, eps: float,
                    background: Optional[HarmonicBackground] = None) -> Configuration:
    """Two collinear disks with boundary gap eps straddling the origin (the
    normalized two-conductor scene all closed-form results refer to)."""
    _check_positive(r1=r1, r2=r2, eps=eps)
    c1 = Disk((-r1 - eps / 2, 0.0), r1)
    c2 = Disk((r2 + eps / 2, 0.0), r2)
    return Configuration(
        bodies=(Body.from_disk(c1), Body.from_disk(c2)),
        groups=((0,), (1,)),
        background=background or HarmonicBackground.linear_x(),
        case_tag="pair",
        params={"r1": r1, "r2": r2, "eps": eps},
    )


def build_case_b(r1: float, r2: float, r3: float, eps1: float, eps2: float,
                 background: Optional[HarmonicBackground] = None) -> Configuration:
    """Three disjoint collinear disks with boundary gaps eps1 (left pair)
    and eps2 (right pair); the small disk r2 sits in the middle."""
    _check_positive(r1=r1, r2=r2, r3=r3, eps1=eps1, eps2=eps2)
    c1 = Disk((-r1 - eps1 / 2, 0.0), r1)
    c2 = Disk((r2 + eps1 / 2, 0.0), r2)
    # center chosen so that the D2-D3 boundary gap equals eps2 exactly
    c3 = Disk((2 * r2 + r3 + eps1 / 2 + eps2, 0.0), r3)
    _regime_warnings([eps1, eps2], r2, (r1, r3))
    return Configuration(
        bodies=(Body.from_disk(c1), Body.from_disk(c2), Body.from_disk(c3)),
        groups=((0,), (1,), (2,)),
        background=background or HarmonicBackground.linear_x(),
        case_tag="B",
        params={"r1": r1, "r2": r2, "r3": r3, "eps1": eps1, "eps2": eps2},
    )


def _as_body(shape) -> Body:
    if isinstance(shape, Body):
        return shape
    if isinstance(shape, Disk):
        return Body.from_disk(shape)
    if isinstance(shape, SmoothBoundary):
        return Body.from_smooth(shape)
    raise InvalidParameterError(f"expected Disk, SmoothBoundary or Body, got {type(shape)!r}")


def _solve_translation(moving: Body, fixed: Body, direction: np.ndarray,
                       eps: float, tol: float = 1e-13) -> Body:
    """Translate ``moving`` along ``direction`` until its gap to ``fixed``
    equals eps (bisection on the monotone gap function)."""
    direction = np.asarray(direction, dtype=float)

    def gdist(t: float) -> float:
        try:
            return body_gap(moving.translated(t * direction), fixed).distance
        except InvalidGeometryError:
            return -1.0

    scale = max(moving.diameter(), fixed.diameter(), eps)
    t_hi = 0.0
    while gdist(t_hi) <= eps and t_hi < 100 * scale:
        t_hi = max(2 * t_hi, 0.1 * scale)
    t_lo = t_hi
    while gdist(t_lo) > eps and t_lo > -100 * scale:
        t_lo = min(2 * t_lo, -0.1 * scale) if t_lo < 0 else -0.1 * scale
    if not (gdist(t_lo) <= eps < gdist(t_hi)):
        raise InvalidGeometryError("could not bracket the requested gap by translation")
    for _ in range(200):
        t_mid = 0.5 * (t_lo + t_hi)
        if gdist(t_mid) > eps:
            t_hi = t_mid
        else:
            t_lo = t_mid
        if t_hi - t_lo < tol * max(1.0, scale):
            break
    return moving.translated(0.5 * (t_lo + t_hi) * direction)


def _require_gap_convexity(body: Body, at_point: np.ndarray) -> None:
    """For smooth bodies, require strictly positive curvature near the gap
    closest point."""
    if body.kind != "smooth":
        return
    s = body.smooth
    t = np.linspace(0, 2 * np.pi, 2048, endpoint=False)
    p = s.point(t)
    i = int(np.argmin((p[:, 0] - at_point[0]) ** 2 + (p[:, 1] - at_point[1]) ** 2))
    s.require_convex_arc(float(t[i]), half_width=0.35)


def _halfplane_check(left: Body, rights: Sequence[Body]) -> None:
    def max_x(b: Body) -> float:
        return max(float(np.max(ch.point(np.linspace(ch.u0, ch.u1, 1024))[:, 0]))
                   for ch in b.charts())

    def min_x(b: Body) -> float:
        return min(float(np.min(ch.point(np.linspace(ch.u0, ch.u1, 1024))[:, 0]))
                   for ch in b.charts())

    if max_x(left) > 1e-9:
        raise InvalidGeometryError("left body crosses into the right half-plane")
    for b in rights:
        if min_x(b) < -1e-9:
            raise InvalidGeometryError("right-side body crosses into the left half-plane")


def _recenter_on_gap(bodies: list[Body], i: int, j: int) -> list[Body]:
    g = body_gap(bodies[i], bodies[j])
    shift = -g.midpoint
    return [b.translated(shift) for b in bodies]


def build_case_c(left, center: Disk, right: Disk, r2: float, eps: float,
                 background: Optional[HarmonicBackground] = None) -> Configuration:
    """General left body against a lens D2 = (r2-scaled center disk) united
    with a fixed right disk.

    ``center`` and ``right`` are given in a nominal frame; ``center`` is
    scaled about the origin by r2 and must then overlap ``right``. The left
    body is translated along the x-axis (bisection) so the gap is exactly
    eps, and the whole scene is recentered so the gap midpoint is the origin.
    The union body keeps circular arcs so its two corners stay exact; a
    general smooth protrusion is out of scope.
    """
    _check_positive(r2=r2, eps=eps)
    if not isinstance(center, Disk) or not isinstance(right, Disk):
        raise InvalidParameterError("the protruding pair must be disks (lens union)")
    lump = Body.lens(center.scaled(r2), right)
    left_body = _as_body(left)
    left_body = _solve_translation(left_body, lump, np.array([-1.0, 0.0]), eps)
    g = body_gap(left_body, lump)
    if abs(g.distance - eps) > 1e-10 * max(1.0, eps):
        raise InvalidGeometryError("gap positioning did not converge")
    # the narrow gap must face the scaled lump, not the big right disk
    sc = center.scaled(r2)
    if abs(np.hypot(g.point_j[0] - sc.center[0], g.point_j[1] - sc.center[1]) - sc.radius) \
            > 1e-8 * sc.radius:
        raise InvalidGeometryError("closest approach is not on the protruding lump")
    _require_gap_convexity(left_body, np.asarray(g.point_i))
    bodies = _recenter_on_gap([left_body, lump], 0, 1)
    _halfplane_check(bodies[0], bodies[1:])
    eps_outer = body_gap(bodies[0], Body.from_disk(bodies[1].lens_disks[1])).distance
    if not (0.2 * r2 <= eps_outer <= 5 * r2):
        warnings.warn("outer-pair separation is not comparable to r2",
                      ScaleRegimeWarning, stacklevel=2)
    return Configuration(
        bodies=tuple(bodies), groups=((0,), (1,)),
        background=background or HarmonicBackground.linear_x(),
        case_tag="C",
        params={"r2": r2, "eps": eps},
    )


def build_case_d(left, center, right, r2: float, eps1: float, eps2: float,
                 background: Optional[HarmonicBackground] = None) -> Configuration:
    """Three disjoint smooth bodies: ``center`` scaled by r2 in the middle,
    ``left`` and ``right`` translated along the x-axis so the gaps are
    exactly eps1 and eps2."""
    _check_positive(r2=r2, eps1=eps1, eps2=eps2)
    mid = _as_body(center)
    if mid.kind == "disk":
        mid = Body.from_disk(mid.disk.scaled(r2))
    elif mid.kind == "smooth":
        mid = Body.from_smooth(mid.smooth.scaled(r2))
    else:
        raise InvalidParameterError("middle body must be a disk or a smooth curve")
    left_body = _solve_translation(_as_body(left), mid, np.array([-1.0, 0.0]), eps1)
    right_body = _solve_translation(_as_body(right), mid, np.array([1.0, 0.0]), eps2)
    g1 = body_gap(left_body, mid)
    g2 = body_gap(mid, right_body)
    for g, eps in ((g1, eps1), (g2, eps2)):
        if abs(g.distance - eps) > 1e-10 * max(1.0, eps):
            raise InvalidGeometryError("gap positioning did not converge")
    _require_gap_convexity(left_body, np.asarray(g1.point_i))
    _require_gap_convexity(mid, np.asarray(g1.point_j))
    _require_gap_convexity(mid, np.asarray(g2.point_i))
    _require_gap_convexity(right_body, np.asarray(g2.point_j))
    bodies = _recenter_on_gap([left_body, mid, right_body], 0, 1)
    _halfplane_check(bodies[0], bodies[1:])
    return Configuration(
        bodies=tuple(bodies), groups=((0,), (1,), (2,)),
        background=background or HarmonicBackground.linear_x(),
        case_tag="D",
        params={"r2": r2, "eps1": eps1, "eps2": eps2},
    )
