import numpy as np
import pytest

from neckfield import (InvalidParameterError, bound_case_a, bound_case_b,
                       bound_case_c, bound_case_d, bound_three_general,
                       build_case_a, build_two_disks, lemma_suite)
from neckfield.asymptotics import DiagnosticCheck
from neckfield.errors import InvalidUsageError
from neckfield.solver.mesh import MeshControls


class TestBoundFormulas:
    def test_case_a_values(self):
        p = bound_case_a(1, 0.05, 1, 1e-4)
        assert p.potential_scale == pytest.approx(0.5 * 0.05**-0.5 * 1e-2, rel=1e-12)
        assert p.potential_scale == pytest.approx(0.02236, rel=1e-3)
        assert p.lower_scale == p.upper_scale

    def test_equal_outer_radii_prefactor(self):
        p = bound_case_a(2.0, 0.05, 2.0, 1e-4)
        q = bound_case_a(1.0, 0.05, 1.0, 1e-4)
        assert p.potential_scale / q.potential_scale == pytest.approx(2.0)

    def test_sqrt_law(self):
        a = bound_case_a(1, 0.05, 1, 1e-4)
        b = bound_case_a(1, 0.05, 1, 4e-4)
        assert b.potential_scale / a.potential_scale == pytest.approx(2.0)

    def test_case_b_per_gap(self):
        p1, p2 = bound_case_b(1, 0.05, 1, 1e-4, 4e-4)
        assert p2.potential_scale / p1.potential_scale == pytest.approx(2.0)
        assert p1.lower_scale == pytest.approx(223.60679, rel=1e-6)
        q1, q2 = bound_case_b(1, 0.05, 1, 2e-4, 2e-4)
        assert q1 == q2

    def test_case_c_values(self):
        p = bound_case_c(0.05, 1e-4)
        assert p.potential_scale == pytest.approx(np.sqrt(1e-4 / 0.05), rel=1e-12)
        assert p.potential_scale == pytest.approx(0.04472, rel=1e-3)
        half = bound_case_c(0.025, 1e-4)
        assert half.potential_scale / p.potential_scale == pytest.approx(np.sqrt(2))

    def test_case_d_symmetry(self):
        p1, p2 = bound_case_d(0.05, 1e-4, 1e-4)
        assert p1.lower_scale == p2.lower_scale
        assert p1.potential_scale == p2.potential_scale

    def test_three_general(self):
        p1, p2 = bound_three_general(1e-4, 1e-4)
        assert p1.lower_scale == pytest.approx(100.0)
        assert p2.lower_scale == pytest.approx(100.0)
        a, b = bound_three_general(1e-4, 9e-4)
        c, d = bound_three_general(9e-4, 1e-4)
        assert a.lower_scale == d.lower_scale and b.lower_scale == c.lower_scale

    def test_r2_equal_one_matches_general(self):
        # with a middle body of unit size the small-lump law reduces to the
        # comparable-bodies law up to the radii prefactor
        (b1, _) = bound_case_b(1, 1.0, 1, 1e-4, 1e-4)
        (g1, _) = bound_three_general(1e-4, 1e-4)
        assert b1.lower_scale == pytest.approx(0.5 * g1.lower_scale)

    def test_homogeneity(self):
        # all lengths scaled by lam: potential scale gains lam, gradient
        # scale is invariant
        lam = 3.7
        p = bound_case_a(1, 0.05, 1, 1e-4)
        q = bound_case_a(lam, lam * 0.05, lam, lam * 1e-4)
        assert q.potential_scale == pytest.approx(lam * p.potential_scale, rel=1e-12)
        assert q.lower_scale == pytest.approx(p.lower_scale, rel=1e-12)

    def test_invalid_parameters(self):
        with pytest.raises(InvalidParameterError):
            bound_case_a(1, -0.05, 1, 1e-4)
        with pytest.raises(InvalidParameterError):
            bound_three_general(0.0, 1e-4)


class TestDiagnostics:
    def test_case_mismatch(self):
        with pytest.raises(InvalidUsageError):
            lemma_suite(build_two_disks(1, 1, 1e-3))

    def test_case_a_suite_small_grid(self):
        cfg = build_case_a(1, 0.05, 1, 0.05, 1e-3)
        rep = lemma_suite(cfg, eps_grid=[1e-4, 1e-3])
        assert rep.passed, [c.name for c in rep.checks if not c.passed]
        names = {c.name for c in rep.checks}
        assert "potential_difference_identity" in names
        assert "pair_difference_monotonicity" in names

    def test_report_csv(self):
        cfg = build_case_a(1, 0.05, 1, 0.05, 1e-3)
        rep = lemma_suite(cfg, eps_grid=[1e-4, 1e-3])
        text = rep.to_csv()
        assert text.startswith("check,spread,passed")
        assert text.count("\n") == len(rep.checks) + 1

    def test_deterministic(self):
        cfg = build_case_a(1, 0.05, 1, 0.05, 1e-3)
        a = lemma_suite(cfg, eps_grid=[1e-3]).to_csv()
        b = lemma_suite(cfg, eps_grid=[1e-3]).to_csv()
        assert a == b

    def test_upper_ratio_check_semantics(self):
        shrinking = DiagnosticCheck.from_upper_ratios("x", [1e-5, 1e-4, 1e-3],
                                                      [1e-3, 1e-2, 0.5])
        assert shrinking.passed
        growing = DiagnosticCheck.from_upper_ratios("x", [1e-5, 1e-4, 1e-3],
                                                    [200.0, 20.0, 2.0])
        assert not growing.passed
