"""Tests for Cartan-frame integration and B-scroll checks."""
import math

import numpy as np
import pytest

from bscroll import (KSpecError, bscroll_checks, closed_form_mismatch, drift_ratios,
                     integrate, locate_k_zeros, make_system, null_curve_residual,
                     ode_identity_residual, parse_k_spec, surface_samples, trajectory_chart)
from harmonicity import PROPER
from immersion import shape_report


@pytest.fixture(scope='module')
def sqrt2_trajectory():
    system = make_system(math.sqrt(2.0), 'const:1')
    return system, integrate(system, 5.0, 1e-3)


class TestKSpec:

    @pytest.mark.parametrize("text,s,value", [
        ('const:2.5', 3.0, 2.5),
        ('poly:1,0,2', 2.0, 9.0),
        ('sin:2,1,0', math.pi / 2, 2.0),
    ])
    def test_values(self, text, s, value):
        assert parse_k_spec(text)(s) == pytest.approx(value)

    def test_derivatives(self):
        assert parse_k_spec('poly:1,0,2').derivative(2.0) == pytest.approx(8.0)
        assert parse_k_spec('sin:2,1,0').derivative(0.0) == pytest.approx(2.0)
        assert parse_k_spec('const:4').derivative(1.0) == 0.0

    @pytest.mark.parametrize("text", ['const:0', 'poly:0,0', 'sin:0,1,0'])
    def test_identically_zero(self, text):
        assert parse_k_spec(text).identically_zero

    @pytest.mark.parametrize("text", ['const', 'tan:1', 'sin:1,2', 'const:abc', 'const:inf', 'const:1,2'])
    def test_malformed(self, text):
        with pytest.raises(KSpecError):
            parse_k_spec(text)


class TestIntegration:

    def test_initial_pairing(self):
        system = make_system(1.0, 'const:1')
        assert system.initial_residual() == 0.0
        for s in (0.0, 1.3, -2.0):
            assert system.conservation_residual(s) == 0.0

    def test_pairing_is_conserved(self, sqrt2_trajectory):
        _, traj = sqrt2_trajectory
        assert traj.max_pairing_drift < 1e-8
        assert traj.s_range == pytest.approx((0.0, 5.0))
        assert len(traj.s) == 5001

    def test_frame_relations(self, sqrt2_trajectory):
        _, traj = sqrt2_trajectory
        relations = traj.frame_relations(1000)
        scale = float(np.max(np.abs(traj.X[1000]))) ** 2
        expected = {'AA': 0.0, 'BB': 0.0, 'AB': -1.0, 'AC': 0.0, 'BC': 0.0, 'CC': 1.0, 'gg': 1.0}
        for name, value in expected.items():
            assert abs(relations[name] - value) <= 1e-7 * scale, name

    def test_identities_along_curve(self, sqrt2_trajectory):
        _, traj = sqrt2_trajectory
        assert null_curve_residual(traj) < 1e-5
        assert ode_identity_residual(traj) < 1e-5

    def test_both_directions(self):
        traj = integrate(make_system(1.0, 'sin:1,1,0'), 1.0, 0.01, both_directions=True)
        assert traj.s_range == pytest.approx((-1.0, 1.0))
        assert 0.0 in traj.s.tolist()
        assert np.allclose(traj.X[100], make_system(1.0, 'sin:1,1,0').X0)

    def test_frame_at_off_grid(self, sqrt2_trajectory):
        _, traj = sqrt2_trajectory
        frame = traj.frame_at(1.2345)
        assert np.allclose(frame, traj.frame_at(1.2345))
        with pytest.raises(ValueError):
            traj.frame_at(6.0)

    def test_invalid_step(self):
        with pytest.raises(ValueError):
            integrate(make_system(1.0, 'const:1'), 1.0, 0.0)

    def test_drift_converges_at_high_order(self):
        ratios = drift_ratios(1.0, 'const:1', 2.0, [0.05, 0.025, 0.0125, 0.00625])
        assert len(ratios) == 3
        assert all(12.0 <= ratio <= 40.0 for ratio in ratios), ratios


class TestClosedForm:

    def test_integrated_frame_matches_closed_form(self):
        traj = integrate(make_system(2.0, 'const:1'), 5.0, 1e-3)
        assert closed_form_mismatch(traj) < 1e-5

    def test_no_closed_form_for_other_k(self):
        traj = integrate(make_system(2.0, 'const:2'), 1.0, 1e-2)
        assert closed_form_mismatch(traj) is None


class TestSurface:

    def test_samples_lie_in_de_sitter_space(self, sqrt2_trajectory):
        _, traj = sqrt2_trajectory
        samples = surface_samples(traj, [-0.5, 0.0, 0.5], stride=250)
        assert len(samples) == 21 * 3
        assert max(sample.membership_residual for sample in samples) < 1e-8

    def test_trajectory_chart_invariants(self, sqrt2_trajectory):
        _, traj = sqrt2_trajectory
        chart = trajectory_chart(traj)
        report = shape_report(chart, np.array([1.0, 0.2]), jordan_tol=1e-6)
        assert report.epsilon == 1
        assert report.trA2 == pytest.approx(4.0, abs=1e-6)
        assert report.gauss_curvature == pytest.approx(3.0, abs=1e-6)
        assert report.jordan.tag == 'II'


class TestChecks:

    @pytest.mark.parametrize("r", [2, 3, 5])
    @pytest.mark.parametrize("sign", [1.0, -1.0])
    def test_proper_at_lambda_squared_r_minus_one(self, r, sign):
        lam = sign * math.sqrt(r - 1.0)
        system = make_system(lam, 'const:1')
        traj = integrate(system, 5.0, 1e-3)
        checks = bscroll_checks(traj, system, r)
        assert checks.harmonicity.verdict == PROPER
        assert checks.gauss_curvature == pytest.approx(float(r), abs=1e-10)
        assert checks.max_pairing_drift < 1e-8
        assert checks.isoparametric is True
        assert checks.numeric_trA2_error < 1e-5
        assert checks.jordan_tags == ('II',)
        assert not checks.needs_review

    def test_wrong_lambda_is_not_harmonic(self):
        system = make_system(1.0, 'const:1')
        checks = bscroll_checks(integrate(system, 2.0, 1e-3), system, 3)
        assert checks.harmonicity.verdict != PROPER

    def test_zeros_of_k_break_isoparametry(self):
        system = make_system(1.0, 'sin:1,1,0')
        checks = bscroll_checks(integrate(system, 4.0, 1e-2, both_directions=True), system, 2)
        assert checks.isoparametric is False
        assert any(abs(z) < 1e-9 for z in checks.k_zeros.definitive)

    def test_report_to_dict(self, sqrt2_trajectory):
        system, traj = sqrt2_trajectory
        data = bscroll_checks(traj, system, 3).to_dict()
        assert data['k_spec'] == 'const:1'
        assert data['harmonicity']['verdict'] == PROPER


class TestKZeros:

    def test_sign_changes_are_refined(self):
        zeros = locate_k_zeros(parse_k_spec('sin:1,1,0'), np.linspace(-4.0, 4.0, 81))
        assert zeros.definitive == pytest.approx((-math.pi, 0.0, math.pi), abs=1e-9)
        assert zeros.suspected == ()

    def test_tangential_zero_is_only_suspected(self):
        traj = integrate(make_system(1.0, 'poly:0,0,1'), 1.0, 0.01, both_directions=True)
        zeros = locate_k_zeros(traj.system.k_spec, traj.s)
        assert zeros.definitive == ()
        assert zeros.suspected == (0.0,)
