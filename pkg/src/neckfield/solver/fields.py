"""Higher-level field constructions on top of the Nystrom solver: the
three-conductor representation through unit-flux fields and the interior
harmonic-basis decomposition inside an enclosing disk.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from ..errors import InvalidGeometryError, InvalidUsageError, NumericFailureError
from ..geometry.body import Body
from ..geometry.config import Configuration
from ..geometry.shapes import Disk
from .mesh import MeshControls, build_mesh
from .nystrom import FieldSolution, SceneOperator, _TWO_PI


@dataclass
class Representation:
    """u = Hc + c1*h1 + c2*h2 for a three-conductor scene, where h1 splits
    {1 | 2,3}, h2 splits {1,2 | 3}, and Hc is the single-constant field.

    The coefficients solve the 2x2 flux system that zeroes the net flux of
    the right-hand side through the first and second conductor boundaries
    (the third follows since all pieces have zero total flux).
    """

    c1: float
    c2: float
    h1: FieldSolution
    h2: FieldSolution
    hc: FieldSolution
    flux_matrix: np.ndarray

    def potential(self, pts, check_domain: bool = True):
        return (self.hc.potential(pts, check_domain)
                + self.c1 * self.h1.potential(pts, check_domain=False)
                + self.c2 * self.h2.potential(pts, check_domain=False))

    def gradient(self, pts, check_domain: bool = True):
        return (self.hc.gradient(pts, check_domain)
                + self.c1 * self.h1.gradient(pts, check_domain=False)
                + self.c2 * self.h2.gradient(pts, check_domain=False))


def representation_coeffs(cfg: Configuration,
                          controls: MeshControls = MeshControls(),
                          op: Optional[SceneOperator] = None) -> Representation:
    """Solve the three-conductor representation; requires conductors ordered
    left/middle/right as in the canonical three-body scenes."""
    if cfg.n_conductors != 3 or any(len(g) != 1 for g in cfg.groups):
        raise InvalidUsageError("representation needs exactly three single-body conductors")
    op = op or SceneOperator(cfg, controls)
    h1 = op.solve_h(((0,), (1, 2)))
    h2 = op.solve_h(((0, 1), (2,)))
    hc = op.solve_hc()
    A = np.array([[h1.boundary_flux(0), h2.boundary_flux(0)],
                  [h1.boundary_flux(1), h2.boundary_flux(1)]])
    rhs = -np.array([hc.boundary_flux(0), hc.boundary_flux(1)])
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    if abs(det) < 1e-12 * max(1.0, float(np.max(np.abs(A)))) ** 2:
        raise NumericFailureError("singular flux system in the representation",
                                  {"matrix": A.tolist()})
    c = scipy.linalg.solve(A, rhs)
    return Representation(float(c[0]), float(c[1]), h1, h2, hc, A)


@dataclass
class InteriorSolution:
    """Harmonic function in an annular region (enclosing disk minus bodies),
    represented as a single layer over all boundaries plus a constant."""

    op: "InteriorOperator"
    g: np.ndarray
    constant: float
    rcond: float

    def __post_init__(self):
        self._fine_cache: dict = {}

    def potential(self, pts):
        pts = np.asarray(pts, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        out = self.op.scene_op.layer_potential(self.g, pts, self._fine_cache) + self.constant
        return float(out[0]) if single else out

    def gradient(self, pts):
        pts = np.asarray(pts, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        out = self.op.scene_op.layer_gradient(self.g, pts, self._fine_cache)
        return out[0] if single else out


class InteriorOperator:
    """Dirichlet solver in disk0 minus the configuration bodies.

    The representation v = S[g] + c with zero total charge is uniquely
    solvable for any boundary data (the added constant absorbs the
    logarithmic-capacity degeneracy of the bare single layer).
    """

    def __init__(self, cfg: Configuration, disk0: Disk,
                 controls: MeshControls = MeshControls()):
        self.cfg = cfg
        self.disk0 = disk0
        mesh = build_mesh(cfg, controls, extra_bodies=(Body.from_disk(disk0),))
        self.scene_op = SceneOperator(cfg, controls, mesh=mesh)
        self.controls = controls
        self.n_bodies = len(cfg.bodies)

    def ring_curve_index(self) -> int:
        return self.n_bodies

    def solve_dirichlet(self, body_values: np.ndarray,
                        ring_values) -> InteriorSolution:
        """Dirichlet data: one constant per body plus nodewise values on the
        enclosing circle (a scalar is broadcast)."""
        mesh = self.scene_op.mesh
        rhs = np.empty(mesh.n_total)
        for b in range(self.n_bodies):
            rhs[mesh.body_nodes(b)] = body_values[b]
        ring = mesh.curve_slice(self.ring_curve_index())
        rhs[ring] = ring_values
        node_group = np.zeros(mesh.n_total, dtype=int)
        g, consts, rcond = self.scene_op._solve_bordered(
            node_group, 1, +1.0, rhs, np.zeros(1))
        return InteriorSolution(self, g, float(consts[0]), rcond)


@dataclass
class Decomposition:
    """u = C0 + v0 + C1*v1 + C3*v3 inside the enclosing disk, where v1 and
    v3 are the harmonic basis functions of the first and third conductor
    (value 1 there, 0 on the other boundaries), v0 carries u's trace on the
    enclosing circle, and C0 is u's constant on the middle conductor.

    C1 = u|_1 - u|_2 and C3 = u|_3 - u|_2, so |C1| and |C3| equal the
    adjacent-pair potential differences.
    """

    C0: float
    C1: float
    C3: float
    v0: InteriorSolution
    v1: InteriorSolution
    v3: InteriorSolution
    u: FieldSolution
    disk0: Disk

    def reconstructed(self, pts):
        return (self.C0 + self.v0.potential(pts) + self.C1 * self.v1.potential(pts)
                + self.C3 * self.v3.potential(pts))

    def residual(self, pts) -> float:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        u_vals = self.u.potential(pts)
        return float(np.max(np.abs(u_vals - self.reconstructed(pts))))

    def probe_points(self, count: int = 200, seed: int = 0) -> np.ndarray:
        """Deterministic exterior points inside the enclosing disk."""
        rng = np.random.default_rng(seed)
        pts = []
        c0, r0 = self.disk0.c, self.disk0.radius
        while len(pts) < count:
            cand = c0 + (rng.random((4 * count, 2)) - 0.5) * 2 * 0.92 * r0
            keep = np.hypot(cand[:, 0] - c0[0], cand[:, 1] - c0[1]) < 0.92 * r0
            cand = cand[keep]
            ext = self.u.op.cfg.exterior_mask(cand)
            for b in self.u.op.cfg.bodies:
                ext &= ~b.contains(cand, pad=0.02 * b.diameter())
            pts.extend(cand[ext][: count - len(pts)])
        return np.asarray(pts[:count])


def decompose_u(cfg: Configuration, disk0: Disk,
                controls: MeshControls = MeshControls(),
                u: Optional[FieldSolution] = None) -> Decomposition:
    """Interior harmonic-basis decomposition of the conductor potential.

    Requires the enclosing disk to contain every body with clearance at
    least twice the largest body diameter.
    """
    if cfg.n_conductors != 3 or any(len(g) != 1 for g in cfg.groups):
        raise InvalidUsageError("decomposition needs exactly three single-body conductors")
    max_diam = max(b.diameter() for b in cfg.bodies)
    for b in cfg.bodies:
        c, r = b.bounding_circle()
        clearance = disk0.radius - (float(np.hypot(*(c - disk0.c))) + r)
        if clearance < 2.0 * max_diam:
            raise InvalidGeometryError(
                f"enclosing disk clearance {clearance:.3g} below twice the "
                f"largest body diameter {max_diam:.3g}")
    u = u or SceneOperator(cfg, controls).solve_u()
    C0 = u.constant(1)
    C1 = u.constant(0) - C0
    C3 = u.constant(2) - C0
    iop = InteriorOperator(cfg, disk0, controls)
    ring_cm = iop.scene_op.mesh.curves[iop.ring_curve_index()]
    u_ring = u.potential(ring_cm.nodes, check_domain=False)
    v0 = iop.solve_dirichlet(np.zeros(3), u_ring - C0)
    v1 = iop.solve_dirichlet(np.array([1.0, 0.0, 0.0]), 0.0)
    v3 = iop.solve_dirichlet(np.array([0.0, 0.0, 1.0]), 0.0)
    return Decomposition(C0, float(C1), float(C3), v0, v1, v3, u, disk0)
