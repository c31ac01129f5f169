"""Boundary meshes for the Nystrom solver.

Each body boundary is one closed curve with a global parameter t in
[0, 2*pi) and midpoint-offset nodes t_j = (j + 1/2) h, so the log-kernel
quadrature keeps its periodic-trapezoid form. Nodes are clustered by an
analytic reparameterization: the node density over the chain coordinate v is

    rho(v) = 1 + sum_f A_f / sqrt(sin^2((v - v_f)/2) + b_f^2),

one term per gap closest point and per lens corner. Away from a feature the
term decays like 1/distance, so panel lengths grow linearly with distance to
the feature (the continuous analogue of dyadic refinement); at the feature
they bottom out at a floor length (a fraction of the gap width, or
2^-levels of the arc length at corners). The cumulative density has a
closed form via incomplete elliptic integrals, so node placement is exact
and the map stays analytic, which the global quadrature rule requires.

Node counts double until measured targets hold:

  * panels within one gap distance of a gap point are shorter than gap/4,
  * at least ``peak_nodes`` nodes lie within the neck scale
    sqrt(gap * curvature radius) on each side of a gap point,
  * panels elsewhere resolve the body at the base density,
  * toward each corner the innermost panels decay geometrically.

Exceeding the total node cap raises RefinementFailureError rather than
returning a silently under-resolved mesh.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy.special import ellipkinc

from ..errors import RefinementFailureError
from ..geometry.body import Body, BoundaryChart
from ..geometry.config import Configuration
from ..geometry.gap import GapInfo

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class MeshControls:
    """Named mesh parameters; ``base_n`` is the starting node count per
    curve and ``cap_total`` the hard cap over all curves of one scene."""

    base_n: int = 192               # below 64: taken literally, resolution targets bypassed
    peak_nodes: int = 12
    gap_panel_growth: float = 1.0 / 6.0   # panel length per unit distance from a gap point
    corner_panel_growth: float = 1.0 / 4.0
    gap_floor_fraction: float = 1.0 / 12.0  # floor panel length as a fraction of the gap
    corner_floor_levels: int = 20           # floor = arc length * 2**-levels
    cap_total: int = 65536
    near_eval_rule: float = 5.0
    upsample_max: int = 64          # cap for upsampled assembly blocks
    eval_upsample_max: int = 512    # cap for near-field evaluation
    rcond_floor: float = 1e-16

    def with_base(self, base_n: Optional[int] = None, cap: Optional[int] = None) -> "MeshControls":
        out = self
        if base_n is not None:
            out = replace(out, base_n=int(base_n))
        if cap is not None:
            out = replace(out, cap_total=int(cap))
        return out


@dataclass(frozen=True)
class FeatureSpec:
    """A clustering target on a body boundary: a gap closest point or a
    corner, with the floor panel length and growth slope it requires."""

    kind: str                # "gap" or "corner"
    v: float                 # chain coordinate
    point: np.ndarray
    floor_arc: float
    growth: float
    gap: float = np.inf
    peak_length: float = 0.0


def _clustered_mass(x, b: float):
    """I(x) = int_0^x dv / sqrt(sin^2(v/2) + b^2), odd in x, via the
    standard extension of the incomplete elliptic integral."""
    m = 1.0 / (1.0 + b * b)
    scale = 2.0 / np.sqrt(1.0 + b * b)
    k_complete = ellipkinc(np.pi / 2, m)
    return scale * (k_complete - ellipkinc(np.pi / 2 - np.asarray(x) / 2.0, m))


class _ChainMap:
    """Analytic clustering map for one closed curve.

    The chain coordinate v traverses the body's charts linearly and is
    rescaled to the angle x = v * (2 pi / v_total); t is the mesh parameter.
    t(x) is proportional to the integrated density rho(x), so equispaced
    t-nodes cluster where the density is large. Amplitudes are calibrated so
    panels grow like ``growth * (distance to feature)`` with the requested
    floor at the feature itself; because every amplitude is proportional to
    the total mass, the total solves in closed form.
    """

    def __init__(self, charts: Sequence[BoundaryChart], features: Sequence[FeatureSpec],
                 n_nodes: int):
        self.charts = list(charts)
        spans = np.array([ch.span for ch in charts])
        self.v_edges = np.concatenate([[0.0], np.cumsum(spans)])
        self.v_total = float(self.v_edges[-1])
        self.scale = _TWO_PI / self.v_total
        self.n = n_nodes
        self.features = list(features)
        h = _TWO_PI / n_nodes
        self.x_f = np.array([f.v * self.scale for f in features])
        # corners join charts of possibly very different speeds; size the
        # floor for the faster side (the slower side only over-refines)
        tiny = 1e-9 * self.v_total
        speeds = np.array([
            max(self._chart_speed((f.v - tiny) % self.v_total),
                self._chart_speed((f.v + tiny) % self.v_total))
            if f.kind == "corner" else self._chart_speed(f.v)
            for f in features])
        self.b = np.array([
            min(max(f.floor_arc * self.scale / (2 * f.growth * sp), 1e-7), 0.5)
            for f, sp in zip(features, speeds)])
        masses = np.array([4.0 * ellipkinc(np.pi / 2, 1.0 / (1 + b * b))
                           / np.sqrt(1 + b * b) for b in self.b])
        coef = np.array([h / (4 * np.pi * f.growth) for f in features])
        denom = 1.0 - float(np.sum(coef * masses)) if len(features) else 1.0
        # a small denominator means the clustering would eat the whole node
        # budget; report unresolved so the planner doubles n
        self.resolved = denom > 0.3
        denom = max(denom, 0.3)
        self.mass_total = _TWO_PI / denom
        self.amps = coef * self.mass_total

    def _chart_speed(self, v: float) -> float:
        i = min(int(np.searchsorted(self.v_edges, v, side="right")) - 1,
                len(self.charts) - 1)
        i = max(i, 0)
        ch = self.charts[i]
        u = ch.u0 + (v - self.v_edges[i])
        d = ch.deriv(np.array([u]))[0]
        return float(np.hypot(d[0], d[1]))

    def rho(self, v):
        x = np.asarray(v, dtype=float) * self.scale
        out = np.ones_like(x)
        for xf, A, b in zip(self.x_f, self.amps, self.b):
            out = out + A / np.sqrt(np.sin((x - xf) / 2) ** 2 + b * b)
        return out

    def mass(self, v):
        x = np.asarray(v, dtype=float) * self.scale
        out = x.astype(float).copy()
        for xf, A, b in zip(self.x_f, self.amps, self.b):
            out = out + A * (_clustered_mass(x - xf, b) - _clustered_mass(-xf, b))
        return out

    def _seed_table(self):
        """Inverse-map table on a uniform-in-mass grid (one bisection sweep);
        interpolating the inverse is well conditioned even inside the
        density bumps, where the forward map is nearly flat in v."""
        if not hasattr(self, "_seeds"):
            total = self.mass(np.array([self.v_total]))[0]
            m_grid = np.linspace(0.0, total, 2049)
            lo = np.zeros_like(m_grid)
            hi = np.full_like(m_grid, self.v_total)
            for _ in range(52):
                mid = 0.5 * (lo + hi)
                low = self.mass(mid) < m_grid
                lo = np.where(low, mid, lo)
                hi = np.where(low, hi, mid)
            self._seeds = (m_grid, 0.5 * (lo + hi), total)
        return self._seeds

    def v_of_t(self, t):
        """Invert t = 2 pi * mass(v) / mass_total: seed from the inverse
        table, then a few Newton steps (quadratic from a uniformly good
        seed)."""
        t = np.asarray(t, dtype=float) % _TWO_PI
        m_tab, v_tab, total = self._seed_table()
        target = t / _TWO_PI * total
        v = np.interp(target, m_tab, v_tab)
        for _ in range(3):
            r = self.mass(v) - target
            v = np.clip(v - r / (self.rho(v) * self.scale), 0.0, self.v_total)
        return v

    def frame_of_v(self, v):
        """Points, chart derivatives and curvature at chain coordinates."""
        v = np.atleast_1d(np.asarray(v, dtype=float))
        pts = np.empty((v.size, 2))
        der = np.empty((v.size, 2))
        kap = np.empty(v.size)
        idx = np.clip(np.searchsorted(self.v_edges, v, side="right") - 1,
                      0, len(self.charts) - 1)
        for i, ch in enumerate(self.charts):
            m = idx == i
            if not np.any(m):
                continue
            u = ch.u0 + (v[m] - self.v_edges[i])
            pts[m] = ch.point(u)
            der[m] = ch.deriv(u)
            kap[m] = ch.curvature(u)
        return pts, der, kap

    def dvdt(self, v):
        return self.mass_total / (_TWO_PI * self.rho(v) * self.scale)


@dataclass
class CurveMesh:
    """Discretization of one closed body boundary."""

    body_index: int
    chain: _ChainMap
    n: int
    h: float
    t: np.ndarray
    v: np.ndarray
    nodes: np.ndarray
    velocity: np.ndarray       # dx/dt including the clustering factor
    speed: np.ndarray
    normal_out: np.ndarray     # outward normal of the body
    curvature: np.ndarray
    weights: np.ndarray        # speed * h (arclength weights)
    spacing: np.ndarray        # local panel arclength per node
    arc_position: np.ndarray   # cumulative arclength at each node
    perimeter: float
    features: list[FeatureSpec]

    def frame_at(self, t):
        """Points, velocities and speeds at arbitrary mesh parameters."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        v = self.chain.v_of_t(t)
        pts, der, _ = self.chain.frame_of_v(v)
        vel = der * self.chain.dvdt(v)[:, None]
        return pts, vel, np.hypot(vel[:, 0], vel[:, 1])

    def point_at(self, t):
        return self.frame_at(t)[0]

    def feature_node_index(self, feat: FeatureSpec) -> int:
        p = feat.point
        return int(np.argmin((self.nodes[:, 0] - p[0]) ** 2 + (self.nodes[:, 1] - p[1]) ** 2))

    def arc_distance_to(self, feat: FeatureSpec) -> np.ndarray:
        """Arclength distance of every node to a feature point, along the
        curve (shorter way around)."""
        j = self.feature_node_index(feat)
        d = np.abs(self.arc_position - self.arc_position[j])
        return np.minimum(d, self.perimeter - d)


def _locate_on_chart(chart: BoundaryChart, p: np.ndarray) -> tuple[float, float]:
    """Parameter of the chart point closest to p, with its distance."""
    u = np.linspace(chart.u0, chart.u1, 4096)
    q = chart.point(u)
    d2 = (q[:, 0] - p[0]) ** 2 + (q[:, 1] - p[1]) ** 2
    i = int(np.argmin(d2))
    lo = u[max(i - 1, 0)]
    hi = u[min(i + 1, len(u) - 1)]
    phi = (np.sqrt(5) - 1) / 2
    a, b = lo, hi
    for _ in range(80):
        c, dd = b - phi * (b - a), a + phi * (b - a)
        pc = chart.point(np.array([c]))[0]
        pd = chart.point(np.array([dd]))[0]
        if (pc[0] - p[0]) ** 2 + (pc[1] - p[1]) ** 2 < (pd[0] - p[0]) ** 2 + (pd[1] - p[1]) ** 2:
            b = dd
        else:
            a = c
    u_best = 0.5 * (a + b)
    q_best = chart.point(np.array([u_best]))[0]
    return float(u_best), float(np.hypot(*(q_best - p)))


def _body_features(body: Body, gap_entries: Sequence[tuple[np.ndarray, float]],
                   controls: MeshControls) -> list[FeatureSpec]:
    charts = body.charts()
    spans = np.concatenate([[0.0], np.cumsum([ch.span for ch in charts])])
    perimeter = sum(ch.arclength() for ch in charts)
    feats: list[FeatureSpec] = []
    for point, gap_dist in gap_entries:
        best = None
        for ci, ch in enumerate(charts):
            u, d = _locate_on_chart(ch, point)
            if best is None or d < best[2]:
                best = (ci, u, d)
        ci, u, _ = best
        ch = charts[ci]
        kappa = float(ch.curvature(np.array([u]))[0])
        _, brad = body.bounding_circle()
        rho_c = 1.0 / kappa if kappa > 1.0 / (20 * brad) else 20 * brad
        peak = float(np.sqrt(gap_dist * rho_c) + 2 * gap_dist)
        v = spans[ci] + (u - ch.u0)
        feats.append(FeatureSpec("gap", v, np.asarray(point, float),
                                 floor_arc=gap_dist * controls.gap_floor_fraction,
                                 growth=controls.gap_panel_growth,
                                 gap=gap_dist, peak_length=peak))
    # merge gap features that crowd each other; the tighter gap wins
    feats.sort(key=lambda f: f.gap)
    kept: list[FeatureSpec] = []
    for f in feats:
        if all(np.hypot(*(f.point - k.point)) > 0.5 * max(f.peak_length, k.peak_length)
               for k in kept):
            kept.append(f)
    # corners of the chart chain
    floor = perimeter * 2.0 ** (-controls.corner_floor_levels)
    for ci, ch in enumerate(charts):
        if ch.corner_start:
            p = ch.point(np.array([ch.u0]))[0]
            kept.append(FeatureSpec("corner", spans[ci], p, floor_arc=floor,
                                    growth=controls.corner_panel_growth))
    return kept


def _mesh_curve(body: Body, body_index: int, feats: list[FeatureSpec],
                controls: MeshControls, n_start: int) -> CurveMesh:
    charts = body.charts()
    # a base count below 64 requests a deliberately coarse mesh: use it
    # literally instead of refining to the resolution targets
    literal = controls.base_n < 64
    n = n_start + (n_start % 2) if literal else max(64, n_start)
    while True:
        chain = _ChainMap(charts, feats, n)
        h = _TWO_PI / n
        t = (np.arange(n) + 0.5) * h
        v = chain.v_of_t(t)
        pts, der, kap = chain.frame_of_v(v)
        vel = der * chain.dvdt(v)[:, None]
        speed = np.hypot(vel[:, 0], vel[:, 1])
        normal = np.stack([vel[:, 1], -vel[:, 0]], axis=-1) / speed[:, None]
        weights = speed * h
        arc = np.cumsum(weights) - 0.5 * weights
        perimeter = float(np.sum(weights))
        cm = CurveMesh(body_index, chain, n, h, t, v, pts, vel, speed, normal,
                       kap, weights, weights.copy(), arc, perimeter, feats)
        if literal or (chain.resolved and _resolution_ok(cm, controls)):
            return cm
        n *= 2
        if n > controls.cap_total:
            raise RefinementFailureError(
                "node cap reached before gap resolution",
                {"body": body_index, "requested_n": n, "cap": controls.cap_total})


def _resolution_ok(cm: CurveMesh, controls: MeshControls) -> bool:
    if np.max(cm.weights) > 3.0 * cm.perimeter / controls.base_n:
        return False
    for f in cm.features:
        d = cm.arc_distance_to(f)
        if f.kind == "gap":
            near = d <= f.gap
            if np.any(near) and np.max(cm.weights[near]) > f.gap / 4:
                return False
            for side in (1, -1):
                j = cm.feature_node_index(f)
                idx = (j + side * np.arange(1, cm.n // 2)) % cm.n
                within = d[idx] <= f.peak_length
                if np.count_nonzero(within) < controls.peak_nodes:
                    return False
        else:
            # toward the corner, panels shrink proportionally to the
            # distance (the continuous form of dyadic refinement) and
            # bottom out at the floor length
            j = cm.feature_node_index(f)
            inner = (d <= cm.perimeter / 8) & (d > 0)
            bound = np.maximum(2.0 * f.growth * d[inner], 8.0 * f.floor_arc)
            if np.any(cm.weights[inner] > bound):
                return False
            if np.min(cm.weights[[(j - 1) % cm.n, j, (j + 1) % cm.n]]) \
                    > 4.0 * f.floor_arc:
                return False
    return True


@dataclass
class BoundaryMesh:
    """All curve meshes of a scene plus the recorded gaps, with concatenated
    node arrays for assembly."""

    curves: list[CurveMesh]
    gaps: dict[tuple[int, int], GapInfo]
    controls: MeshControls

    def __post_init__(self):
        ns = [c.n for c in self.curves]
        self.offsets = np.concatenate([[0], np.cumsum(ns)]).astype(int)
        self.n_total = int(self.offsets[-1])
        self.nodes = np.concatenate([c.nodes for c in self.curves])
        self.normals = np.concatenate([c.normal_out for c in self.curves])
        self.weights = np.concatenate([c.weights for c in self.curves])
        self.speed = np.concatenate([c.speed for c in self.curves])
        self.curvature = np.concatenate([c.curvature for c in self.curves])
        self.spacing = np.concatenate([c.spacing for c in self.curves])
        self.body_of_node = np.concatenate([
            np.full(c.n, c.body_index, dtype=int) for c in self.curves])

    def curve_slice(self, i: int) -> slice:
        return slice(self.offsets[i], self.offsets[i + 1])

    def body_nodes(self, body_index: int) -> np.ndarray:
        return np.nonzero(self.body_of_node == body_index)[0]


def build_mesh(cfg: Configuration, controls: MeshControls = MeshControls(),
               extra_bodies: Sequence[Body] = ()) -> BoundaryMesh:
    """Mesh every body of the configuration (and any extra enclosing bodies,
    used by the interior decomposition solver)."""
    gaps = cfg.all_conductor_gaps()
    per_body: dict[int, list[tuple[np.ndarray, float]]] = {i: [] for i in range(len(cfg.bodies))}
    for (gi, gj), info in gaps.items():
        pi, pj = np.asarray(info.point_i), np.asarray(info.point_j)
        bi = _closest_body(cfg, cfg.groups[gi], pi)
        bj = _closest_body(cfg, cfg.groups[gj], pj)
        per_body[bi].append((pi, info.distance))
        per_body[bj].append((pj, info.distance))

    curves = []
    budget_used = 0
    for i, body in enumerate(cfg.bodies):
        feats = _body_features(body, per_body[i], controls)
        cm = _mesh_curve(body, i, feats, controls, controls.base_n)
        budget_used += cm.n
        if budget_used > controls.cap_total:
            raise RefinementFailureError("total node cap exceeded",
                                         {"used": budget_used, "cap": controls.cap_total})
        curves.append(cm)
    for k, body in enumerate(extra_bodies):
        feats = _body_features(body, [], controls)
        cm = _mesh_curve(body, len(cfg.bodies) + k, feats, controls, controls.base_n)
        curves.append(cm)
    return BoundaryMesh(curves, gaps, controls)


def _closest_body(cfg: Configuration, group: tuple[int, ...], p: np.ndarray) -> int:
    best, best_d = group[0], np.inf
    for b in group:
        for ch in cfg.bodies[b].charts():
            _, d = _locate_on_chart(ch, p)
            if d < best_d:
                best, best_d = b, d
    return best
