import numpy as np
import pytest

from neckfield import (Body, Configuration, Disk, DomainError,
                       HarmonicBackground, MeshControls, RefinementFailureError,
                       SceneOperator, build_case_a, build_case_b,
                       build_two_disks, images, max_gap_gradient, solve_h,
                       solve_hc, solve_u)
from neckfield.errors import InvalidUsageError
from neckfield.solver.mesh import build_mesh
from neckfield.solver.nystrom import kussmaul_row, trig_resample


def single_disk(radius=1.0):
    return Configuration((Body.from_disk(Disk((0, 0), radius)),), ((0,),),
                         HarmonicBackground.linear_x())


class TestQuadratureCore:
    def test_log_rule_eigenvalues(self):
        # on a circle of radius a the single layer maps cos(mt) to
        # -a cos(mt)/(2m) and constants to a log(a)
        for a in (1.0, 2.0):
            op = SceneOperator(single_disk(a), MeshControls(base_n=64))
            A = op._slp
            t = op.mesh.curves[0].t
            for m in (1, 3, 7):
                g = np.cos(m * t) * a
                err = np.max(np.abs(A @ g + a * np.cos(m * t) / (2 * m)))
                assert err < 1e-13
            assert np.max(np.abs(A @ (np.ones_like(t) * a) - a * np.log(a))) < 1e-13

    def test_log_rule_needs_even_count(self):
        with pytest.raises(Exception):
            kussmaul_row(33)

    def test_trig_resample(self):
        t = (np.arange(32) + 0.5) * 2 * np.pi / 32
        v = np.cos(5 * t) + 0.3 * np.sin(3 * t) - 1.7
        f = trig_resample(v, 128)
        tf = (np.arange(128) + 0.5) * 2 * np.pi / 128
        assert np.max(np.abs(f - (np.cos(5 * tf) + 0.3 * np.sin(3 * tf) - 1.7))) < 1e-13


class TestSingleDisk:
    def test_classical_solution(self):
        # u = x (1 - 1/|x|^2) for the unit disk in H = x1; the unit circle
        # sits exactly at logarithmic capacity one, which the bordered
        # system must tolerate
        u = solve_u(single_disk(), MeshControls(base_n=64))
        assert abs(u.constant(0)) < 1e-12
        th = np.linspace(0, 2 * np.pi, 100, endpoint=False)
        pts = np.stack([1.9 * np.cos(th), 2.4 * np.sin(th)], -1)
        exact = pts[:, 0] * (1 - 1 / (pts[:, 0] ** 2 + pts[:, 1] ** 2))
        assert np.max(np.abs(u.potential(pts) - exact)) < 1e-8

    def test_gradient_value(self):
        u = solve_u(single_disk(), MeshControls(base_n=64))
        g = u.gradient(np.array([2.0, 0.0]))
        assert g[0] == pytest.approx(1.25, abs=1e-8)
        assert abs(g[1]) < 1e-10

    def test_flux_vanishes(self):
        u = solve_u(single_disk(), MeshControls(base_n=64))
        assert abs(u.boundary_flux(0)) < 1e-12

    def test_eval_inside_rejected(self):
        u = solve_u(single_disk(), MeshControls(base_n=64))
        with pytest.raises(DomainError):
            u.potential(np.array([[0.2, 0.1]]))


@pytest.fixture(scope="module")
def scene():
    cfg = build_two_disks(1, 1, 1e-3)
    op = SceneOperator(cfg)
    return cfg, op, op.solve_u(), op.solve_h(((0,), (1,)))


class TestTwoDisks:
    def test_oracle_equivalence(self, scene):
        cfg, op, u, h = scene
        f = images.psi_two_disks(*(b.disk for b in cfg.bodies))
        th = np.linspace(0, 2 * np.pi, 100, endpoint=False)
        pts = np.vstack([np.stack([3 * np.cos(th), 3 * np.sin(th)], -1),
                         np.stack([np.zeros(50), np.linspace(2.5e-3, 1.0, 50)], -1)])
        rel = np.max(np.abs(h.potential(pts) - f.potential(pts))) \
            / np.max(np.abs(f.potential(pts)))
        assert rel < 1e-10

    def test_h_constants_match_oracle(self, scene):
        cfg, op, u, h = scene
        f = images.psi_two_disks(*(b.disk for b in cfg.bodies))
        assert h.constant(0) == pytest.approx(f.boundary_value_1, rel=1e-10)
        assert h.constant(1) == pytest.approx(f.boundary_value_2, rel=1e-10)
        assert h.constant(1) - h.constant(0) > 0

    def test_h_unit_fluxes(self, scene):
        cfg, op, u, h = scene
        assert h.boundary_flux(0) == pytest.approx(-1.0, abs=1e-6)
        assert h.boundary_flux(1) == pytest.approx(1.0, abs=1e-6)

    def test_u_difference_exact_identity(self, scene):
        cfg, op, u, h = scene
        exact = images.two_disk_potential_difference(
            *(b.disk for b in cfg.bodies), cfg.background)
        assert u.potential_difference(1, 0) == pytest.approx(exact, rel=1e-9)

    def test_antisymmetric_constants(self, scene):
        cfg, op, u, h = scene
        assert abs(u.constant(0) + u.constant(1)) < 1e-10

    def test_flux_residual_independent_quadrature(self, scene):
        cfg, op, u, h = scene
        dnu = u.normal_derivative_nodes()
        for b in (0, 1):
            idx = u.mesh.body_nodes(b)
            assert abs(np.sum(u.mesh.weights[idx] * dnu[idx])) < 1e-8

    def test_weighted_flux_identity(self, scene):
        # sum of H-weighted fluxes of the unit-flux field equals the
        # potential difference of the conductor problem
        cfg, op, u, h = scene
        total = sum(h.boundary_flux_weighted(b, cfg.background) for b in (0, 1))
        du = u.potential_difference(1, 0)
        assert abs(total - du) / abs(du) < 1e-6

    def test_constant_weight_reduces_to_flux(self, scene):
        cfg, op, u, h = scene
        one = lambda pts: np.ones(pts.shape[0])
        assert h.boundary_flux_weighted(0, one) == pytest.approx(-1.0, abs=1e-6)
        assert u.boundary_flux_weighted(0, one) == pytest.approx(0.0, abs=1e-8)

    def test_boundary_constancy(self, scene):
        cfg, op, u, h = scene
        assert h.boundary_constancy_error() < 1e-8
        assert u.boundary_constancy_error() < 1e-8

    def test_maximum_principle(self, scene):
        cfg, op, u, h = scene
        rng = np.random.default_rng(11)
        pts = rng.uniform(-6, 6, size=(20000, 2))
        keep = cfg.exterior_mask(pts)
        for b in cfg.bodies:
            keep &= ~b.contains(pts, pad=1e-3)
        pts = pts[keep][:10000]
        vals = h.potential(pts)
        k1, k2 = h.constant(0), h.constant(1)
        tol = 1e-10 * (k2 - k1)
        assert np.all(vals >= k1 - tol) and np.all(vals <= k2 + tol)

    def test_far_field_decay(self, scene):
        cfg, op, u, h = scene
        # grad(u - H) decays like 1/|x|^2
        g3 = u.gradient(np.array([1e3, 2e2])) - cfg.background.gradient(np.array([1e3, 2e2]))
        g4 = u.gradient(np.array([1e4, 2e3])) - cfg.background.gradient(np.array([1e4, 2e3]))
        assert np.hypot(*g3) < 1e-4
        assert np.hypot(*g4) / np.hypot(*g3) == pytest.approx(1e-2, rel=0.2)

    def test_neck_gradient_profile(self, scene):
        cfg, op, u, h = scene
        info = cfg.conductor_gap(0, 1)
        mg = max_gap_gradient(u, info)
        # difference-quotient consistency (mean value theorem)
        du = u.potential_difference(1, 0)
        assert 0.8 <= mg.max_magnitude * info.distance / du <= 1.25
        # symmetric profile: midpoint gradient parallel to the axis, and
        # mirrored sample points agree
        gm = u.gradient(info.midpoint)
        assert abs(gm[1]) <= 1e-8 * np.hypot(*gm)
        s = np.linspace(0.15, 0.85, 15)
        pts = info.segment[0][None, :] + s[:, None] * (info.segment[1] - info.segment[0])
        mags = np.hypot(*u.gradient(pts).T)
        assert np.allclose(mags, mags[::-1], rtol=1e-6)

    def test_self_convergence(self):
        cfg = build_two_disks(1, 1, 1e-3)
        du = []
        for base in (192, 384):
            u = solve_u(cfg, MeshControls(base_n=base))
            du.append(u.potential_difference(1, 0))
        assert abs(du[1] - du[0]) / abs(du[1]) < 1e-7


class TestPartitionsAndGroups:
    def test_h_partition_validation(self):
        cfg = build_case_b(1, 0.05, 1, 1e-3, 1e-3)
        op = SceneOperator(cfg)
        with pytest.raises(InvalidUsageError):
            op.solve_h(((0,), (1,)))
        with pytest.raises(InvalidUsageError):
            op.solve_h(((0,), (1,), (2,)))

    def test_grouped_fluxes(self):
        cfg = build_case_b(1, 0.05, 1, 1e-3, 1e-3)
        op = SceneOperator(cfg)
        h1 = op.solve_h(((0,), (1, 2)))
        assert h1.group_flux(0) == pytest.approx(-1.0, abs=1e-8)
        assert h1.group_flux(1) == pytest.approx(1.0, abs=1e-8)
        # flux splits between the two right-hand bodies
        assert 0 < h1.boundary_flux(2) < 1

    def test_green_identity_pair(self):
        # int a dnu_b = int b dnu_a for two unit-flux fields on the same
        # geometry (both sides via constants times body fluxes)
        cfg = build_case_b(1, 0.05, 1, 1e-3, 1e-3)
        op = SceneOperator(cfg)
        a = op.solve_h(((0,), (1, 2)))
        b = op.solve_h(((0, 1), (2,)))

        def paired(f, g):
            total = 0.0
            for body in range(3):
                const = f.constants[[gi for gi, mem in enumerate(f.groups)
                                     if body in mem][0]]
                total += const * g.boundary_flux(body)
            return total

        lhs = paired(a, b)
        rhs = paired(b, a)
        assert abs(lhs - rhs) <= 1e-8 * max(abs(lhs), abs(rhs), 1e-3)


class TestHc:
    def test_constant_background(self):
        cfg = build_two_disks(1, 1, 1e-2,
                              background=HarmonicBackground.constant(2.5))
        hc = solve_hc(cfg, MeshControls(base_n=96))
        assert hc.constant(0) == pytest.approx(2.5, abs=1e-10)
        pts = np.array([[3.0, 1.0], [0.0, 2.0]])
        assert np.allclose(hc.potential(pts), 2.5, atol=1e-10)

    def test_mirror_symmetric_constant_vanishes(self):
        cfg = build_case_b(1, 0.05, 1, 1e-3, 1e-3)
        centered = cfg.translated(-np.array(cfg.bodies[1].disk.center))
        centered = Configuration(centered.bodies, centered.groups,
                                 HarmonicBackground.linear_x(), "B")
        hc = solve_hc(centered)
        assert abs(hc.constant(0)) < 1e-10

    def test_constant_within_background_range(self):
        rng = np.random.default_rng(5)
        for _ in range(8):
            disks = []
            while len(disks) < 3:
                c = rng.uniform(-2, 2, size=2)
                r = rng.uniform(0.2, 0.6)
                if all(np.hypot(*(c - d.c)) > r + d.radius + 0.05 for d in disks):
                    disks.append(Disk(tuple(c), r))
            coeffs = tuple(complex(a, b) for a, b in rng.normal(size=(3, 2)))
            H = HarmonicBackground(coeffs)
            cfg = Configuration(tuple(Body.from_disk(d) for d in disks),
                                tuple((i,) for i in range(3)), H)
            hc = solve_hc(cfg, MeshControls(base_n=96))
            assert abs(hc.constant(0)) <= H.sup_on_disks(disks) + 1e-9


class TestMeshInvariants:
    def test_nodes_on_boundary(self):
        cfg = build_case_a(1, 0.05, 1, 0.05, 1e-3)
        mesh = build_mesh(cfg)
        cm = mesh.curves[0]
        d1 = cfg.bodies[0].disk
        r = np.hypot(cm.nodes[:, 0] - d1.center[0], cm.nodes[:, 1] - d1.center[1])
        assert np.max(np.abs(r - d1.radius)) < 1e-12
        lens = cfg.bodies[1]
        cm2 = mesh.curves[1]
        r2 = np.hypot(cm2.nodes[:, 0] - lens.lens_disks[0].center[0],
                      cm2.nodes[:, 1] - lens.lens_disks[0].center[1])
        r3 = np.hypot(cm2.nodes[:, 0] - lens.lens_disks[1].center[0],
                      cm2.nodes[:, 1] - lens.lens_disks[1].center[1])
        on_either = np.minimum(np.abs(r2 - lens.lens_disks[0].radius),
                               np.abs(r3 - lens.lens_disks[1].radius))
        assert np.max(on_either) < 1e-12

    def test_positive_weights_and_gap_panels(self):
        eps = 1e-4
        cfg = build_two_disks(1, 1, eps)
        mesh = build_mesh(cfg)
        for cm in mesh.curves:
            assert np.all(cm.weights > 0)
            for f in cm.features:
                if f.kind != "gap":
                    continue
                d = cm.arc_distance_to(f)
                near = d <= f.gap
                assert np.max(cm.weights[near]) <= f.gap / 4

    def test_corner_grading(self):
        cfg = build_case_a(1, 0.05, 1, 0.05, 1e-3)
        mesh = build_mesh(cfg)
        cm = mesh.curves[1]
        corners = [f for f in cm.features if f.kind == "corner"]
        assert len(corners) == 2
        for f in corners:
            d = cm.arc_distance_to(f)
            inner = (d <= cm.perimeter / 8) & (d > 0)
            bound = np.maximum(2.0 * f.growth * d[inner], 8.0 * f.floor_arc)
            assert np.all(cm.weights[inner] <= bound)
            j = cm.feature_node_index(f)
            assert np.min(cm.weights[[j - 1, j, (j + 1) % cm.n]]) <= 4 * f.floor_arc

    def test_refinement_failure_at_cap(self):
        with pytest.raises(RefinementFailureError):
            build_mesh(build_two_disks(1, 1, 1e-6), MeshControls(cap_total=128))

    def test_near_boundary_evaluation(self):
        cfg = build_two_disks(1, 1, 1e-3)
        h = solve_h(cfg, ((0,), (1,)))
        f = images.psi_two_disks(*(b.disk for b in cfg.bodies))
        cm = h.mesh.curves[0]
        ts = np.linspace(0.3, 6.0, 25)
        pts, vel, sp = cm.frame_at(ts)
        n_out = np.stack([vel[:, 1], -vel[:, 0]], -1) / sp[:, None]
        for dist in (1e-4, 1e-3, 1e-2):
            q = pts + dist * n_out
            keep = np.ones(len(q), dtype=bool)
            for b in cfg.bodies:
                keep &= ~b.contains(q)
            err = np.max(np.abs(h.potential(q[keep]) - f.potential(q[keep])))
            assert err < 1e-8
