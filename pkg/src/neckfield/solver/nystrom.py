"""Single-layer Nystrom solver for the exterior and interior Laplace
problems of the package.

Representation: fields are ``S[sigma](x) = (1/2pi) int log|x-y| sigma(y) ds(y)``
(plus the harmonic background where one applies), discretized with the
periodic trapezoid rule and the Kussmaul-Martensen log-singularity weights on
each curve's own block. The unknown per node is ``g = sigma * |dx/dt|``, the
density times the parameterization speed, which keeps columns uniformly
scaled under heavy grading.

Sign conventions (used consistently everywhere):

  * the boundary normal ``nu`` points INTO a body (outward normal of the
    exterior domain), so the flux of the field through a body boundary is
    minus the enclosed single-layer charge: ``int_dB nu.grad u dS = -q_B``;
  * exterior-side jump relation: d/dn_out S = +sigma/2 + K'sigma, hence
    ``nu.grad u = -(dH/dn_out + sigma/2 + K'sigma)`` on body boundaries.

Every solve is a bordered system: collocation rows enforce constant boundary
values with the per-group constants as extra unknowns, and one charge row
per group pins the group's total charge (0 for the conductor problem, -/+1
for the two-group unit-flux problem, 0 in total for the single-constant
problem). With the charges pinned, decay at infinity of the represented
field is automatic and the bordered matrix is nonsingular even when a curve
sits at logarithmic capacity one, where the bare single-layer operator
degenerates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg

from ..errors import (DomainError, InvalidParameterError, InvalidUsageError,
                      NumericFailureError)
from ..geometry.body import Body
from ..geometry.config import Configuration
from ..geometry.gap import GapInfo
from ..geometry.shapes import Disk, HarmonicBackground
from .mesh import BoundaryMesh, CurveMesh, MeshControls, build_mesh

_TWO_PI = 2.0 * np.pi


def kussmaul_row(n_nodes: int) -> np.ndarray:
    """First row of the circulant quadrature for
    int_0^{2pi} log(4 sin^2((t-s)/2)) f(s) ds on an even equispaced grid
    (any offset); exact for trigonometric polynomials below the Nyquist
    degree."""
    if n_nodes % 2 != 0:
        raise InvalidParameterError("log-kernel rule needs an even node count")
    n = n_nodes // 2
    k = np.arange(n_nodes)
    m = np.arange(1, n)
    # rho_k = -(4pi/N) [ sum_m cos(m k h)/m + cos(n k h)/(2n) ],  h = 2pi/N
    cos_table = np.cos(np.outer(k, m) * (_TWO_PI / n_nodes))
    rho = cos_table @ (1.0 / m) + np.cos(k * np.pi) / (2.0 * n)
    return -(4.0 * np.pi / n_nodes) * rho


def trig_resample(values: np.ndarray, m_fine: int) -> np.ndarray:
    """Trigonometric interpolation of samples on the midpoint grid
    t_j = (j+1/2) 2pi/N onto the finer midpoint grid with m_fine points.
    The Nyquist mode is dropped (it is not recoverable on midpoint grids)."""
    v = np.asarray(values, dtype=float)
    n_nodes = v.size
    n = n_nodes // 2
    V = np.fft.fft(v)
    h = _TWO_PI / n_nodes
    ks = np.fft.fftfreq(n_nodes, 1.0 / n_nodes).astype(int)
    c = np.zeros(m_fine, dtype=complex)
    for idx, k in enumerate(ks):
        if abs(k) >= n:
            continue
        c[k % m_fine] = V[idx] * np.exp(-1j * k * h / 2) / n_nodes
    h_f = _TWO_PI / m_fine
    kf = np.fft.fftfreq(m_fine, 1.0 / m_fine).astype(int)
    fine = np.fft.ifft(c * np.exp(1j * kf * h_f / 2)) * m_fine
    return fine.real


def _log_kernel(targets: np.ndarray, sources: np.ndarray) -> np.ndarray:
    dx = targets[:, 0][:, None] - sources[:, 0][None, :]
    dy = targets[:, 1][:, None] - sources[:, 1][None, :]
    return 0.5 * np.log(dx * dx + dy * dy) / _TWO_PI


def _grad_kernel(targets: np.ndarray, sources: np.ndarray):
    dx = targets[:, 0][:, None] - sources[:, 0][None, :]
    dy = targets[:, 1][:, None] - sources[:, 1][None, :]
    r2 = dx * dx + dy * dy
    with np.errstate(divide="ignore", invalid="ignore"):
        return dx / r2 / _TWO_PI, dy / r2 / _TWO_PI


class SceneOperator:
    """Assembled single-layer operator for one mesh; solves the exterior
    problems of a configuration and evaluates the represented fields."""

    def __init__(self, cfg: Configuration, controls: MeshControls = MeshControls(),
                 mesh: Optional[BoundaryMesh] = None):
        self.cfg = cfg
        self.controls = controls
        self.mesh = mesh if mesh is not None else build_mesh(cfg, controls)
        self._interp_cache: dict[tuple[int, int], np.ndarray] = {}
        self._fine_cache: dict[tuple[int, int], np.ndarray] = {}
        self._slp = self._assemble_slp()
        self._kprime: Optional[np.ndarray] = None

    def _fine_points(self, curve_index: int, factor: int) -> np.ndarray:
        key = (curve_index, factor)
        if key not in self._fine_cache:
            cm = self.mesh.curves[curve_index]
            m_fine = factor * cm.n
            t_f = (np.arange(m_fine) + 0.5) * (_TWO_PI / m_fine)
            self._fine_cache[key] = cm.point_at(t_f)
        return self._fine_cache[key]

    # -- near-field bookkeeping --------------------------------------------

    def _near_targets(self, cm: CurveMesh, pts: np.ndarray):
        """For each target point: distance to the source curve, and the
        largest panel length in the arc window the log kernel actually sees
        (4x the distance around the nearest node). A target is 'near' when
        that window is too coarse for plain quadrature."""
        d2 = ((pts[:, None, :] - cm.nodes[None, :, :]) ** 2).sum(axis=2)
        idx = np.arange(pts.shape[0])
        j_near = np.argmin(d2, axis=1)
        d_node = np.sqrt(d2[idx, j_near])
        # the nearest node may sit tangentially off the foot point; the
        # normal component is the honest curve distance for near targets
        delta = pts - cm.nodes[j_near]
        d_perp = np.abs(np.einsum("ij,ij->i", delta, cm.normal_out[j_near]))
        d_min = np.where(d_node < 3.0 * cm.spacing[j_near],
                         np.maximum(d_perp, 1e-3 * d_node), d_node)
        s_win = np.empty(pts.shape[0])
        coarse = float(np.max(cm.weights))
        maybe = d_min < self.controls.near_eval_rule * coarse
        s_win[~maybe] = 0.0
        for i in np.nonzero(maybe)[0]:
            da = np.abs(cm.arc_position - cm.arc_position[j_near[i]])
            da = np.minimum(da, cm.perimeter - da)
            s_win[i] = np.max(cm.weights[da <= 4.0 * d_min[i] + cm.weights[j_near[i]]])
        active = maybe & (d_min < self.controls.near_eval_rule * s_win)
        return active, d_min, s_win

    def _interp_matrix(self, curve_index: int, factor: int) -> np.ndarray:
        """Trigonometric interpolation matrix from a curve's midpoint grid to
        the factor-times-finer midpoint grid (Dirichlet kernel in closed
        form)."""
        key = (curve_index, factor)
        if key not in self._interp_cache:
            cm = self.mesh.curves[curve_index]
            n_nodes = cm.n
            m_fine = factor * n_nodes
            s = (np.arange(m_fine) + 0.5) * (_TWO_PI / m_fine)
            delta = s[:, None] - cm.t[None, :]
            P = (np.sin((n_nodes - 1) * delta / 2) / np.sin(delta / 2)
                 + np.cos(n_nodes * delta / 2)) / n_nodes
            self._interp_cache[key] = P
        return self._interp_cache[key]

    def _pow2_factor(self, needed: float, cap: int) -> int:
        factor = 2
        while factor < needed and factor < cap:
            factor *= 2
        return factor

    # -- assembly ---------------------------------------------------------

    def _assemble_slp(self) -> np.ndarray:
        mesh = self.mesh
        n_tot = mesh.n_total
        A = np.empty((n_tot, n_tot))
        for ci, cm in enumerate(mesh.curves):
            si = mesh.curve_slice(ci)
            for cj, cm2 in enumerate(mesh.curves):
                sj = mesh.curve_slice(cj)
                if ci == cj:
                    A[si, sj] = self._self_block(cm)
                else:
                    A[si, sj] = self._cross_block(cj, cm.nodes)
        return A

    def _cross_block(self, src_index: int, targets: np.ndarray,
                     normals: Optional[np.ndarray] = None) -> np.ndarray:
        """Kernel block from one source curve to arbitrary targets, with
        upsampled quadrature rows for targets close to the curve. With
        ``normals`` given, assembles the normal-derivative kernel instead."""
        cm = self.mesh.curves[src_index]

        def form(tgt, src_pts, h, nrm):
            if nrm is None:
                return _log_kernel(tgt, src_pts) * h
            gx, gy = _grad_kernel(tgt, src_pts)
            return (nrm[:, 0][:, None] * gx + nrm[:, 1][:, None] * gy) * h

        block = form(targets, cm.nodes, cm.h, normals)
        active, d_min, s_win = self._near_targets(cm, targets)
        if np.any(active):
            needed = float(np.max(3.0 * s_win[active] / np.maximum(d_min[active], 1e-300)))
            factor = self._pow2_factor(needed, self.controls.upsample_max)
            P = self._interp_matrix(src_index, factor)
            m_fine = factor * cm.n
            pts_f = self._fine_points(src_index, factor)
            nrm = normals[active] if normals is not None else None
            fine = form(targets[active], pts_f, _TWO_PI / m_fine, nrm)
            block[active] = fine @ P
        return block

    def _self_block(self, cm: CurveMesh) -> np.ndarray:
        rho = kussmaul_row(cm.n)
        idx = np.arange(cm.n)
        R = rho[(idx[:, None] - idx[None, :]) % cm.n]
        dt = cm.t[:, None] - cm.t[None, :]
        s2 = 4.0 * np.sin(0.5 * dt) ** 2
        dx = cm.nodes[:, 0][:, None] - cm.nodes[:, 0][None, :]
        dy = cm.nodes[:, 1][:, None] - cm.nodes[:, 1][None, :]
        d2 = dx * dx + dy * dy
        np.fill_diagonal(d2, 1.0)
        np.fill_diagonal(s2, 1.0)
        K2 = np.log(d2 / s2)
        np.fill_diagonal(K2, 2.0 * np.log(cm.speed))
        return (R + cm.h * K2) / (4.0 * np.pi)

    def kprime_matrix(self) -> np.ndarray:
        """Adjoint double-layer matrix acting on g: (K'sigma)(x_i) =
        sum_j (1/2pi) n_i.(x_i - y_j)/|x_i - y_j|^2 g_j h_j, with the smooth
        diagonal limit kappa_i/(4pi) on each curve's own block."""
        if self._kprime is not None:
            return self._kprime
        mesh = self.mesh
        n_tot = mesh.n_total
        K = np.empty((n_tot, n_tot))
        for ci, cm in enumerate(mesh.curves):
            si = mesh.curve_slice(ci)
            for cj, cm2 in enumerate(mesh.curves):
                sj = mesh.curve_slice(cj)
                if ci == cj:
                    gx, gy = _grad_kernel(cm.nodes, cm2.nodes)
                    blk = (cm.normal_out[:, 0][:, None] * gx
                           + cm.normal_out[:, 1][:, None] * gy)
                    np.fill_diagonal(blk, cm.curvature / (4.0 * np.pi))
                    K[si, sj] = blk * cm2.h
                else:
                    K[si, sj] = self._cross_block(cj, cm.nodes, normals=cm.normal_out)
        self._kprime = K
        return K

    # -- generic bordered solve -------------------------------------------

    def _solve_bordered(self, node_group: np.ndarray, n_groups: int,
                        const_coeff: float, rhs_nodes: np.ndarray,
                        charge_rhs: np.ndarray):
        mesh = self.mesh
        n_tot = mesh.n_total
        h_of_node = np.concatenate([np.full(c.n, c.h) for c in mesh.curves])
        M = np.zeros((n_tot + n_groups, n_tot + n_groups))
        M[:n_tot, :n_tot] = self._slp
        M[np.arange(n_tot), n_tot + node_group] = const_coeff
        for g in range(n_groups):
            mask = node_group == g
            M[n_tot + g, :n_tot][mask] = h_of_node[mask]
        rhs = np.concatenate([rhs_nodes, charge_rhs])
        lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
        gecon = scipy.linalg.get_lapack_funcs("gecon", (M,))
        rcond, _ = gecon(lu, np.linalg.norm(M, 1), norm="1")
        if not np.isfinite(rcond) or rcond < self.controls.rcond_floor:
            raise NumericFailureError("linear system too ill-conditioned",
                                      {"rcond": float(rcond), "n": int(n_tot)})
        sol = scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)
        return sol[:n_tot], sol[n_tot:], float(rcond)

    # -- problem frontends --------------------------------------------------

    def solve_u(self, groups: Optional[Sequence[Sequence[int]]] = None) -> "FieldSolution":
        """Conductor problem: u = H + S[sigma], constant per conductor,
        zero net flux per conductor. ``groups`` overrides the configuration's
        conductor partition (equipotential unions of bodies)."""
        groups = tuple(tuple(g) for g in (groups or self.cfg.groups))
        node_group = self._node_group(groups)
        rhs = -self.cfg.background(self.mesh.nodes)
        g, consts, rcond = self._solve_bordered(node_group, len(groups), -1.0,
                                                rhs, np.zeros(len(groups)))
        return FieldSolution(self, "u", tuple(tuple(x) for x in groups), g,
                             consts, self.cfg.background, 0.0, rcond)

    def solve_h(self, partition: Sequence[Sequence[int]]) -> "FieldSolution":
        """Two-group unit-flux problem: h = S[sigma] with h -> 0 at
        infinity, flux -1 through the first group and +1 through the second
        (charges +1 and -1)."""
        part = tuple(tuple(p) for p in partition)
        if len(part) != 2:
            raise InvalidUsageError("partition must have exactly two groups")
        if sorted(i for p in part for i in p) != list(range(len(self.cfg.bodies))):
            raise InvalidUsageError("partition must cover all bodies exactly once")
        node_group = self._node_group(part)
        g, consts, rcond = self._solve_bordered(node_group, 2, -1.0,
                                                np.zeros(self.mesh.n_total),
                                                np.array([1.0, -1.0]))
        return FieldSolution(self, "h", part, g, consts, None, 0.0, rcond)

    def solve_hc(self) -> "FieldSolution":
        """Single-constant problem: H^c = H + S[sigma] with one shared
        boundary constant and zero total charge."""
        part = (tuple(range(len(self.cfg.bodies))),)
        node_group = self._node_group(part)
        rhs = -self.cfg.background(self.mesh.nodes)
        g, consts, rcond = self._solve_bordered(node_group, 1, -1.0, rhs,
                                                np.zeros(1))
        return FieldSolution(self, "hc", part, g, consts,
                             self.cfg.background, 0.0, rcond)

    def _node_group(self, groups: Sequence[Sequence[int]]) -> np.ndarray:
        body_to_group = {}
        for gi, members in enumerate(groups):
            for b in members:
                body_to_group[b] = gi
        return np.array([body_to_group[b] for b in self.mesh.body_of_node])

    # -- evaluation --------------------------------------------------------

    def layer_potential(self, g: np.ndarray, pts: np.ndarray,
                        cache: Optional[dict] = None) -> np.ndarray:
        pts = np.atleast_2d(pts)
        out = np.zeros(pts.shape[0])
        for ci in range(len(self.mesh.curves)):
            out += self._curve_potential(ci, g[self.mesh.curve_slice(ci)], pts, cache)
        return out

    def layer_gradient(self, g: np.ndarray, pts: np.ndarray,
                       cache: Optional[dict] = None) -> np.ndarray:
        pts = np.atleast_2d(pts)
        out = np.zeros((pts.shape[0], 2))
        for ci in range(len(self.mesh.curves)):
            out += self._curve_gradient(ci, g[self.mesh.curve_slice(ci)], pts, cache)
        return out

    def _fine_quadrature(self, curve_index: int, g: np.ndarray, factor: int,
                         cache: Optional[dict] = None):
        cm = self.mesh.curves[curve_index]
        m_fine = factor * cm.n
        key = (curve_index, factor)
        if cache is not None and key in cache:
            g_fine = cache[key]
        else:
            g_fine = trig_resample(g, m_fine)
            if cache is not None:
                cache[key] = g_fine
        pts_f = self._fine_points(curve_index, factor)
        return pts_f, g_fine, _TWO_PI / m_fine

    def _curve_potential(self, curve_index: int, g: np.ndarray, pts: np.ndarray,
                         cache: Optional[dict] = None) -> np.ndarray:
        cm = self.mesh.curves[curve_index]
        out = _log_kernel(pts, cm.nodes) @ g * cm.h
        active, d_min, s_win = self._near_targets(cm, pts)
        if np.any(active):
            needed = float(np.max(3.0 * s_win[active] / np.maximum(d_min[active], 1e-300)))
            factor = self._pow2_factor(needed, self.controls.eval_upsample_max)
            pts_f, g_fine, h_f = self._fine_quadrature(curve_index, g, factor, cache)
            out[active] = _log_kernel(pts[active], pts_f) @ g_fine * h_f
        return out

    def _curve_gradient(self, curve_index: int, g: np.ndarray, pts: np.ndarray,
                        cache: Optional[dict] = None) -> np.ndarray:
        cm = self.mesh.curves[curve_index]
        gx, gy = _grad_kernel(pts, cm.nodes)
        out = np.stack([gx @ g, gy @ g], axis=-1) * cm.h
        active, d_min, s_win = self._near_targets(cm, pts)
        if np.any(active):
            needed = float(np.max(3.0 * s_win[active] / np.maximum(d_min[active], 1e-300)))
            factor = self._pow2_factor(needed, self.controls.eval_upsample_max)
            pts_f, g_fine, h_f = self._fine_quadrature(curve_index, g, factor, cache)
            gx, gy = _grad_kernel(pts[active], pts_f)
            out[active] = np.stack([gx @ g_fine, gy @ g_fine], axis=-1) * h_f
        return out

    def on_surface_potential(self, g: np.ndarray, curve_index: int,
                             ts: np.ndarray) -> np.ndarray:
        """S[sigma] evaluated at arbitrary parameters of one curve (the
        log-singular own-curve part via the general-target Kussmaul rule,
        other curves via near-aware quadrature)."""
        cm = self.mesh.curves[curve_index]
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        pts, _, speeds = cm.frame_at(ts)
        n = cm.n // 2
        m = np.arange(1, n)
        dt = ts[:, None] - cm.t[None, :]
        cosmat = np.zeros_like(dt)
        for mm in m:   # modest mode counts; loop keeps memory flat
            cosmat += np.cos(mm * dt) / mm
        cosmat += np.cos(n * dt) / (2 * n)
        R = -(4.0 * np.pi / cm.n) * cosmat
        d2 = ((pts[:, None, :] - cm.nodes[None, :, :]) ** 2).sum(axis=2)
        s2 = 4.0 * np.sin(0.5 * dt) ** 2
        # within ~1e-6 of a node the difference quotient loses digits to
        # cancellation; switch to the diagonal limit there
        tiny = np.abs(dt) < 1e-6
        ratio = np.where(tiny, 1.0, d2 / np.where(tiny, 1.0, s2))
        K2 = np.log(ratio)
        if np.any(tiny):
            rows, cols = np.nonzero(tiny)
            K2[rows, cols] = 2.0 * np.log(np.maximum(speeds[rows], 1e-300))
        own = (R + cm.h * K2) @ (g[self.mesh.curve_slice(curve_index)]) / (4.0 * np.pi)
        other = np.zeros(ts.size)
        for cj in range(len(self.mesh.curves)):
            if cj == curve_index:
                continue
            other += self._curve_potential(cj, g[self.mesh.curve_slice(cj)], pts)
        return own + other


@dataclass
class FieldSolution:
    """A solved exterior field with its boundary constants.

    ``kind`` is "u" (conductor problem), "h" (two-group unit-flux problem)
    or "hc" (single shared constant); ``groups`` lists body indices per
    constant.
    """

    op: SceneOperator
    kind: str
    groups: tuple[tuple[int, ...], ...]
    g: np.ndarray
    constants: np.ndarray
    background: Optional[HarmonicBackground]
    additive_constant: float
    rcond: float

    def __post_init__(self):
        self._fine_cache: dict = {}

    @property
    def mesh(self) -> BoundaryMesh:
        return self.op.mesh

    @property
    def sigma(self) -> np.ndarray:
        return self.g / self.mesh.speed

    def constant(self, group: int) -> float:
        return float(self.constants[group])

    def potential_difference(self, group_b: int, group_a: int) -> float:
        """Boundary constant of group_b minus that of group_a."""
        return float(self.constants[group_b] - self.constants[group_a])

    def _check_exterior(self, pts: np.ndarray) -> None:
        for b in self.op.cfg.bodies:
            if np.any(b.contains(pts)):
                raise DomainError("evaluation point lies inside a body")

    def potential(self, pts, check_domain: bool = True):
        pts = np.asarray(pts, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if check_domain:
            self._check_exterior(pts)
        out = self.op.layer_potential(self.g, pts, self._fine_cache) + self.additive_constant
        if self.background is not None:
            out = out + self.background(pts)
        return float(out[0]) if single else out

    def gradient(self, pts, check_domain: bool = True):
        pts = np.asarray(pts, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if check_domain:
            self._check_exterior(pts)
        out = self.op.layer_gradient(self.g, pts, self._fine_cache)
        if self.background is not None:
            out = out + self.background.gradient(pts)
        return out[0] if single else out

    # -- boundary functionals ------------------------------------------------

    def body_charge(self, body_index: int) -> float:
        idx = self.mesh.body_nodes(body_index)
        h = np.concatenate([np.full(c.n, c.h) for c in self.mesh.curves])
        return float(np.sum(self.g[idx] * h[idx]))

    def boundary_flux(self, body_index: int) -> float:
        """int_dB nu.grad field dS with nu into the body; equals minus the
        enclosed layer charge (entire backgrounds contribute nothing)."""
        return -self.body_charge(body_index)

    def group_flux(self, group: int) -> float:
        return sum(self.boundary_flux(b) for b in self.groups[group])

    def normal_derivative_nodes(self) -> np.ndarray:
        """nu.grad of the field at all nodes (exterior-side limit)."""
        kp = self.op.kprime_matrix()
        val = self.sigma / 2 + kp @ self.g
        if self.background is not None:
            hn = np.einsum("ij,ij->i", self.background.gradient(self.mesh.nodes),
                           self.mesh.normals)
            val = val + hn
        return -val

    def boundary_flux_weighted(self, body_index: int, f: Callable) -> float:
        """int_dB f nu.grad field dS by node quadrature; f maps (m,2) points
        to values."""
        idx = self.mesh.body_nodes(body_index)
        dnu = self.normal_derivative_nodes()[idx]
        fv = np.asarray(f(self.mesh.nodes[idx]), dtype=float)
        return float(np.sum(self.mesh.weights[idx] * fv * dnu))

    def boundary_constancy_error(self, samples_per_curve: int = 64) -> float:
        """Max off-node deviation of the boundary trace from its group
        constant, relative to the spread of the constants (floored)."""
        scale = max(float(np.max(self.constants) - np.min(self.constants)), 1e-12)
        worst = 0.0
        node_group = self.op._node_group(self.groups)
        for ci, cm in enumerate(self.mesh.curves):
            ts = (np.arange(samples_per_curve) + 0.31) * (_TWO_PI / samples_per_curve)
            vals = self.op.on_surface_potential(self.g, ci, ts) + self.additive_constant
            if self.background is not None:
                pts, _, _ = cm.frame_at(ts)
                vals = vals + self.background(pts)
            c = self.constants[node_group[self.mesh.curve_slice(ci)][0]]
            worst = max(worst, float(np.max(np.abs(vals - c))))
        return worst / scale


def solve_u(cfg: Configuration, controls: MeshControls = MeshControls()) -> FieldSolution:
    return SceneOperator(cfg, controls).solve_u()


def solve_h(cfg: Configuration, partition: Sequence[Sequence[int]],
            controls: MeshControls = MeshControls()) -> FieldSolution:
    return SceneOperator(cfg, controls).solve_h(partition)


def solve_hc(cfg: Configuration, controls: MeshControls = MeshControls()) -> FieldSolution:
    return SceneOperator(cfg, controls).solve_hc()


@dataclass(frozen=True)
class GapGradient:
    max_magnitude: float
    argmax: tuple[float, float]


def max_gap_gradient(sol: FieldSolution, gap_info: GapInfo,
                     samples: int = 33) -> GapGradient:
    """Maximum of |grad field| over the neck segment: Chebyshev samples of
    the open segment plus golden-section refinement around the discrete
    maximum."""
    if samples < 5:
        raise InvalidParameterError("need at least 5 samples")
    a, b = gap_info.segment
    k = np.arange(1, samples + 1)
    xi = np.cos((2 * k - 1) * np.pi / (2 * samples))[::-1]
    s = 0.5 * (1 + xi)

    def mag(sv):
        pts = a[None, :] + np.outer(np.atleast_1d(sv), (b - a))
        gr = sol.gradient(pts, check_domain=False)
        return np.hypot(gr[:, 0], gr[:, 1])

    vals = mag(s)
    i = int(np.argmax(vals))
    lo = s[i - 1] if i > 0 else 1e-6
    hi = s[i + 1] if i < samples - 1 else 1.0 - 1e-6
    phi = (np.sqrt(5) - 1) / 2
    c, d = hi - phi * (hi - lo), lo + phi * (hi - lo)
    fc, fd = float(mag(c)[0]), float(mag(d)[0])
    for _ in range(60):
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - phi * (hi - lo)
            fc = float(mag(c)[0])
        else:
            lo, c, fc = c, d, fd
            d = lo + phi * (hi - lo)
            fd = float(mag(d)[0])
    s_best = 0.5 * (lo + hi)
    v_best = float(mag(s_best)[0])
    if v_best < vals[i]:
        s_best, v_best = float(s[i]), float(vals[i])
    p = a + s_best * (b - a)
    return GapGradient(v_best, (float(p[0]), float(p[1])))
