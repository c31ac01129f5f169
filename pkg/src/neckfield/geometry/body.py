"""Bodies: connected inclusion cross-sections built from one disk, one smooth
curve, or the union of two overlapping disks (a lens with two corners).

A body exposes its boundary as a list of ``BoundaryChart`` pieces traversed
counterclockwise; meshing and gap location work only through that interface.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..errors import InvalidGeometryError
from .shapes import Disk, SmoothBoundary


@dataclass(frozen=True)
class BoundaryChart:
    """One smooth piece of a body boundary.

    ``point/deriv/second`` are vectorized over the chart parameter
    u in [u0, u1]; for full closed curves the parameter is 2*pi-periodic and
    ``closed`` is True. ``corner_start``/``corner_end`` mark endpoints where
    the body boundary has a genuine corner.
    """

    point: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    second: Callable[[np.ndarray], np.ndarray]
    u0: float
    u1: float
    closed: bool = False
    corner_start: bool = False
    corner_end: bool = False

    @property
    def span(self) -> float:
        return self.u1 - self.u0

    def curvature(self, u):
        d = self.deriv(u)
        s = self.second(u)
        sp = np.hypot(d[..., 0], d[..., 1])
        return (d[..., 0] * s[..., 1] - d[..., 1] * s[..., 0]) / sp**3

    def arclength(self, n: int = 256) -> float:
        # Gauss-Legendre estimate, plenty for mesh planning
        x, w = np.polynomial.legendre.leggauss(n)
        u = 0.5 * (self.u0 + self.u1) + 0.5 * self.span * x
        d = self.deriv(u)
        return float(0.5 * self.span * np.sum(w * np.hypot(d[:, 0], d[:, 1])))


def lens_corners(d1: Disk, d2: Disk) -> tuple[np.ndarray, np.ndarray]:
    """Intersection points of the two circles, upper one first.

    Requires genuine overlap: the circles intersect transversally and
    neither disk contains the other.
    """
    c1, c2 = d1.c, d2.c
    d = float(np.hypot(*(c2 - c1)))
    if d >= d1.radius + d2.radius:
        raise InvalidGeometryError("lens disks do not overlap")
    if d <= abs(d1.radius - d2.radius):
        raise InvalidGeometryError("one lens disk contains the other")
    e = (c2 - c1) / d
    e_perp = np.array([-e[1], e[0]])
    along = (d * d + d1.radius**2 - d2.radius**2) / (2 * d)
    h2 = d1.radius**2 - along**2
    if h2 <= 0:
        raise InvalidGeometryError("lens disks are tangent (degenerate corners)")
    h = np.sqrt(h2)
    base = c1 + along * e
    upper = base + h * e_perp
    lower = base - h * e_perp
    return upper, lower


class Body:
    """A single conductor cross-section.

    Construct with :meth:`from_disk`, :meth:`from_smooth`, or :meth:`lens`.
    """

    def __init__(self, kind: str, disk: Optional[Disk] = None,
                 smooth: Optional[SmoothBoundary] = None,
                 lens_disks: Optional[tuple[Disk, Disk]] = None):
        self.kind = kind
        self.disk = disk
        self.smooth = smooth
        self.lens_disks = lens_disks
        self.corners: tuple[np.ndarray, ...] = ()
        if kind == "lens":
            assert lens_disks is not None
            self.corners = lens_corners(*lens_disks)

    @staticmethod
    def from_disk(d: Disk) -> "Body":
        return Body("disk", disk=d)

    @staticmethod
    def from_smooth(s: SmoothBoundary) -> "Body":
        return Body("smooth", smooth=s)

    @staticmethod
    def lens(da: Disk, db: Disk) -> "Body":
        """Union of two overlapping disks; boundary has exactly two corners."""
        return Body("lens", lens_disks=(da, db))

    # -- identity / transforms -------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Body) or self.kind != other.kind:
            return NotImplemented if not isinstance(other, Body) else False
        if self.kind == "disk":
            return self.disk == other.disk
        if self.kind == "smooth":
            return self.smooth == other.smooth
        return self.lens_disks == other.lens_disks

    def __repr__(self):
        if self.kind == "disk":
            return f"Body.from_disk({self.disk!r})"
        if self.kind == "smooth":
            return f"Body.from_smooth({self.smooth!r})"
        return f"Body.lens({self.lens_disks[0]!r}, {self.lens_disks[1]!r})"

    def translated(self, v) -> "Body":
        if self.kind == "disk":
            return Body.from_disk(self.disk.translated(v))
        if self.kind == "smooth":
            return Body.from_smooth(self.smooth.translated(v))
        return Body.lens(self.lens_disks[0].translated(v), self.lens_disks[1].translated(v))

    def mirrored_x(self) -> "Body":
        """Reflection through the vertical axis x = 0."""
        def flip_disk(d: Disk) -> Disk:
            return Disk((-d.center[0], d.center[1]), d.radius)

        if self.kind == "disk":
            return Body.from_disk(flip_disk(self.disk))
        if self.kind == "lens":
            return Body.lens(flip_disk(self.lens_disks[0]), flip_disk(self.lens_disks[1]))
        s = self.smooth
        # x -> -x flips orientation; also negate the parameter to restore CCW
        return Body.from_smooth(SmoothBoundary(
            (-s.center[0], s.center[1]),
            tuple(-v for v in s.cos_x), tuple(v for v in s.sin_x),
            tuple(v for v in s.cos_y), tuple(-v for v in s.sin_y)))

    # -- geometry queries --------------------------------------------------

    def contains(self, pts, pad: float = 0.0):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.kind == "disk":
            return self.disk.contains(pts, pad)
        if self.kind == "smooth":
            return self.smooth.contains(pts, pad)
        da, db = self.lens_disks
        return da.contains(pts, pad) | db.contains(pts, pad)

    def bounding_circle(self) -> tuple[np.ndarray, float]:
        if self.kind == "disk":
            return self.disk.c, self.disk.radius
        if self.kind == "smooth":
            t = np.linspace(0, 2 * np.pi, 512, endpoint=False)
            p = self.smooth.point(t)
            c = 0.5 * (p.min(axis=0) + p.max(axis=0))
            return c, float(np.max(np.hypot(p[:, 0] - c[0], p[:, 1] - c[1])))
        da, db = self.lens_disks
        c = 0.5 * (da.c + db.c)
        r = max(float(np.hypot(*(da.c - c))) + da.radius,
                float(np.hypot(*(db.c - c))) + db.radius)
        return c, r

    def diameter(self) -> float:
        _, r = self.bounding_circle()
        return 2.0 * r

    def charts(self) -> list[BoundaryChart]:
        if self.kind == "disk":
            d = self.disk
            return [BoundaryChart(d.point, d.deriv, d.second, 0.0, 2 * np.pi, closed=True)]
        if self.kind == "smooth":
            s = self.smooth
            return [BoundaryChart(s.point, s.deriv, s.second, 0.0, 2 * np.pi, closed=True)]
        return self._lens_charts()

    def _lens_charts(self) -> list[BoundaryChart]:
        da, db = self.lens_disks
        upper, lower = self.corners

        def outer_range(d: Disk, other: Disk) -> tuple[float, float]:
            # CCW angle range of d's arc that lies outside the other disk
            au = float(np.arctan2(upper[1] - d.center[1], upper[0] - d.center[0]))
            al = float(np.arctan2(lower[1] - d.center[1], lower[0] - d.center[0]))
            # candidate arc from upper to lower corner, CCW (increasing angle)
            lo, hi = au, al
            while hi <= lo:
                hi += 2 * np.pi
            mid = d.point(0.5 * (lo + hi))
            if other.contains(mid[None, :])[0]:
                # wrong side: take the complementary arc lower -> upper
                lo, hi = al, au
                while hi <= lo:
                    hi += 2 * np.pi
            return lo, hi

        ra = outer_range(da, db)
        rb = outer_range(db, da)

        charts = [
            BoundaryChart(da.point, da.deriv, da.second, ra[0], ra[1],
                          corner_start=True, corner_end=True),
            BoundaryChart(db.point, db.deriv, db.second, rb[0], rb[1],
                          corner_start=True, corner_end=True),
        ]
        # order the two arcs so the traversal is a single CCW loop: the end
        # point of the first chart must coincide with the start of the second
        end_a = da.point(np.array([ra[1]]))[0]
        start_b = db.point(np.array([rb[0]]))[0]
        if not np.allclose(end_a, start_b, atol=1e-9 * (da.radius + db.radius)):
            charts.reverse()
        return charts
