"""Tests for charts, fundamental forms and shape reports."""
import math

import numpy as np
import pytest

from catalog import pseudo_sphere_slice
from chart_spec import parse_chart_document
from immersion import (DerivativePolicy, ImmersionChart, check_membership, christoffel,
                       codazzi_trace_residual, fundamental_data, gradient_and_laplacian,
                       shape_report)
from pgeom_core import DegenerateMetric, DimensionMismatch
from space_form import flat


def plane_chart() -> ImmersionChart:
    return ImmersionChart(ambient=flat(3, 0), map=lambda u: np.array([u[0], u[1], 0.0]),
                          domain=((-1.0, 1.0), (-1.0, 1.0)),
                          jacobian=lambda u: np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]),
                          hessian=lambda u: np.zeros((2, 2, 3)), name='plane')


def unit_sphere_chart() -> ImmersionChart:
    def point(u):
        return np.array([u[0], u[1], math.sqrt(1.0 - u[0] ** 2 - u[1] ** 2)])

    return ImmersionChart(ambient=flat(3, 0), map=point, domain=((-0.5, 0.5), (-0.5, 0.5)),
                          policy=DerivativePolicy.finite_difference(), name='unit sphere')


class TestImmersionChart:

    def test_domain_must_match_dimension(self):
        with pytest.raises(DimensionMismatch):
            ImmersionChart(ambient=flat(3, 0), map=lambda u: u, domain=((0.0, 1.0),))

    def test_empty_interval(self):
        with pytest.raises(ValueError):
            ImmersionChart(ambient=flat(3, 0), map=lambda u: u, domain=((0.0, 1.0), (1.0, 1.0)))

    def test_grid_size_and_margin(self):
        grid = plane_chart().grid(4)
        assert len(grid) == 16
        assert all(-0.95 <= v <= 0.95 for p in grid for v in p)

    def test_finite_differences_match_analytic(self):
        chart = pseudo_sphere_slice(2, 1, 3.0).chart
        fd = chart.with_finite_differences()
        u = np.array([0.1, -0.05])
        assert np.allclose(fd.first_derivatives(u), chart.first_derivatives(u), atol=1e-8)
        assert np.allclose(fd.second_derivatives(u), chart.second_derivatives(u), atol=1e-6)

    def test_membership(self):
        chart = pseudo_sphere_slice(2, 1, 3.0).chart
        assert chart.membership_residual(chart.center()) < 1e-12
        assert check_membership(chart, chart.grid(3), 1e-10)


class TestShapeReport:

    def test_small_pseudo_sphere(self):
        chart = pseudo_sphere_slice(2, 1, 3.0).chart
        report = shape_report(chart, np.array([0.13, -0.07]))
        assert report.epsilon == 1
        assert abs(report.f) == pytest.approx(math.sqrt(2.0), abs=1e-10)
        assert report.trA2 == pytest.approx(4.0, abs=1e-10)
        assert report.gauss_curvature == pytest.approx(3.0, abs=1e-10)
        assert report.jordan.tag == 'I'
        assert report.self_adjoint_residual < 1e-9
        assert report.frame.signs == (-1, 1)

    def test_orientation_flip_changes_sign_of_f(self):
        chart = pseudo_sphere_slice(2, 1, 3.0).chart
        u = chart.center()
        plain = shape_report(chart, u)
        flipped = shape_report(chart, u, orientation=-1)
        assert flipped.f == pytest.approx(-plain.f)
        assert flipped.trA2 == pytest.approx(plain.trA2)
        assert flipped.orientation.endswith(',flipped')

    def test_reference_normal_orientation(self):
        chart = pseudo_sphere_slice(2, 1, 3.0).chart
        u = chart.center()
        base = fundamental_data(chart, u)
        aligned = fundamental_data(chart, u + 0.01, reference_normal=-base.normal)
        assert aligned.orientation == 'reference'
        assert np.dot(aligned.normal, base.normal) < 0

    def test_custom_fd_chart_of_unit_sphere(self):
        report = shape_report(unit_sphere_chart(), np.array([0.1, 0.2]))
        assert report.epsilon == 1
        assert report.trA2 == pytest.approx(2.0, abs=1e-5)
        assert report.gauss_curvature == pytest.approx(1.0, abs=1e-5)

    def test_richardson_ratio_of_hessian_step(self):
        exact = shape_report(pseudo_sphere_slice(2, 1, 3.0).chart, np.array([0.13, -0.07])).trA2
        errors = []
        for h in (2e-2, 1e-2):
            chart = pseudo_sphere_slice(2, 1, 3.0).chart.with_finite_differences(1e-5, h)
            errors.append(abs(shape_report(chart, np.array([0.13, -0.07])).trA2 - exact))
        assert 3.5 <= errors[0] / errors[1] <= 4.5

    def test_degenerate_tangent_plane(self):
        chart = ImmersionChart(ambient=flat(3, 1), map=lambda u: np.array([u[0], u[0], u[1]]),
                               domain=((-1.0, 1.0), (-1.0, 1.0)),
                               jacobian=lambda u: np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]),
                               hessian=lambda u: np.zeros((2, 2, 3)))
        with pytest.raises(DegenerateMetric):
            shape_report(chart, np.zeros(2))

    def test_point_outside_domain(self):
        with pytest.raises(ValueError):
            shape_report(plane_chart(), np.array([2.0, 0.0]))

    def test_wrong_point_shape(self):
        with pytest.raises(DimensionMismatch):
            shape_report(plane_chart(), np.zeros(3))

    def test_to_dict(self):
        data = shape_report(plane_chart(), np.zeros(2)).to_dict()
        assert data['trA2'] == 0.0
        assert data['epsilon'] == 1


class TestFieldDerivatives:

    def test_plane_has_no_christoffel_symbols(self):
        assert np.allclose(christoffel(plane_chart(), np.zeros(2)), 0.0)

    def test_laplacian_sign_convention(self):
        value, grad, laplacian = gradient_and_laplacian(
            plane_chart(), lambda u: u[0] ** 2 + u[1] ** 2, np.array([0.2, 0.1]))
        assert value == pytest.approx(0.05)
        assert grad == pytest.approx([0.4, 0.2], abs=1e-8)
        assert laplacian == pytest.approx(-4.0, abs=1e-6)

    def test_codazzi_trace_on_umbilic_surface(self):
        chart = pseudo_sphere_slice(2, 1, 3.0).chart
        residual = codazzi_trace_residual(chart, np.array([0.05, 0.02]))
        assert np.max(np.abs(residual)) < 1e-5

    def test_codazzi_trace_on_non_cmc_graph(self):
        spec = parse_chart_document({
            'family': 'custom',
            'ambient': {'dim': 3, 'index': 1, 'curvature': 1.0},
            'coordinates': ['u1', 'u2', 'a + b*u1^2 + q*u1*u2',
                            'sqrt(1 + u1^2 - u2^2 - (a + b*u1^2 + q*u1*u2)^2)'],
            'constants': {'a': 0.3, 'b': 0.2, 'q': 0.1},
            'domain': [[-0.3, 0.3], [-0.3, 0.3]],
        })
        chart = spec.chart
        u = np.array([0.1, -0.05])
        normal = fundamental_data(chart, u).normal
        f_values = [shape_report(chart, v, reference_normal=normal).f for v in chart.grid(3)]
        assert max(f_values) - min(f_values) > 1e-4
        residual = codazzi_trace_residual(chart, u, h_outer=1e-4)
        assert np.linalg.norm(residual) < 1e-3
