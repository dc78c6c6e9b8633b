"""Tests for chart specification documents."""
import json
import math

import numpy as np
import pytest
import sympy

from catalog import ConstraintViolation
from chart_spec import ChartSpecError, load_chart_spec, parse_chart_document, parse_expression
from immersion import FINITE_DIFFERENCE, shape_report

U1, U2 = sympy.symbols('u1 u2', real=True)
VARIABLES = {'u1': U1, 'u2': U2}

UNIT_SPHERE = {
    'family': 'custom',
    'ambient': {'dim': 3, 'index': 0, 'curvature': 0.0},
    'coordinates': ['u1', 'u2', 'sqrt(1 - u1^2 - u2^2)'],
    'domain': [[-0.5, 0.5], [-0.5, 0.5]],
}


class TestExpressions:

    def test_arithmetic_and_functions(self):
        expr = parse_expression('2*u1^2 + sin(u2) - cosh(0)', VARIABLES)
        assert float(expr.subs({U1: 0.5, U2: math.pi / 2})) == pytest.approx(0.5)

    def test_named_constants(self):
        expr = parse_expression('R*cos(u1) + pi', VARIABLES, {'R': 2.0})
        assert float(expr.subs({U1: 0.0})) == pytest.approx(2.0 + math.pi)

    @pytest.mark.parametrize("text", [
        '__import__("os")',
        'exp(u1)',
        'u3 + 1',
        'u1; u2',
        '',
        'lambda: 1',
    ])
    def test_rejected(self, text):
        with pytest.raises(ChartSpecError):
            parse_expression(text, VARIABLES)

    def test_syntax_error(self):
        with pytest.raises(ChartSpecError):
            parse_expression('u1 +* u2', VARIABLES)


class TestCustomCharts:

    def test_unit_sphere(self):
        spec = parse_chart_document(UNIT_SPHERE)
        assert spec.surface is None
        assert spec.orientation == 1
        report = shape_report(spec.chart, np.array([0.1, -0.2]))
        assert report.trA2 == pytest.approx(2.0, abs=1e-10)
        assert abs(report.f) == pytest.approx(1.0, abs=1e-10)
        assert report.gauss_curvature == pytest.approx(1.0, abs=1e-10)

    def test_finite_difference_policy(self):
        document = dict(UNIT_SPHERE, derivatives='finite_difference', step=1e-5, hessian_step=1e-4)
        spec = parse_chart_document(document)
        assert spec.chart.policy.kind == FINITE_DIFFERENCE
        assert shape_report(spec.chart, np.zeros(2)).trA2 == pytest.approx(2.0, abs=1e-5)

    def test_constants_in_coordinates(self):
        document = dict(UNIT_SPHERE, constants={'R': 2.0},
                        coordinates=['u1', 'u2', 'sqrt(R^2 - u1^2 - u2^2)'])
        report = shape_report(parse_chart_document(document).chart, np.zeros(2))
        assert report.trA2 == pytest.approx(0.5, abs=1e-10)

    @pytest.mark.parametrize("change,message", [
        ({'coordinates': ['u1', 'u2']}, "coordinate expressions"),
        ({'domain': [[-0.5, 0.5]]}, "domain"),
        ({'domain': [[-0.5, 0.5], [0.5]]}, "interval"),
        ({'constants': {'pi': 3.0}}, "clash"),
        ({'colour': 'red'}, "unknown keys"),
        ({'ambient': {'dim': 3, 'signature': 0}}, "unknown keys"),
        ({'orientation': 2}, "orientation"),
        ({'step': 1e-4}, "finite_difference"),
        ({'derivatives': 'spectral'}, "derivatives"),
    ])
    def test_malformed(self, change, message):
        with pytest.raises(ChartSpecError, match=message):
            parse_chart_document(dict(UNIT_SPHERE, **change))

    def test_missing_key(self):
        document = {k: v for k, v in UNIT_SPHERE.items() if k != 'domain'}
        with pytest.raises(ChartSpecError, match="domain"):
            parse_chart_document(document)


class TestCatalogDocuments:

    def test_catalog_family(self):
        spec = parse_chart_document({'family': 'sphere', 'params': {'m': 2, 't': 1, 'c': 3.0},
                                     'orientation': -1})
        assert spec.surface is not None
        assert spec.surface.family == 'sphere'
        assert spec.orientation == -1

    def test_catalog_with_finite_differences(self):
        spec = parse_chart_document({'family': 'sphere', 'params': {'m': 2, 't': 1, 'c': 3.0},
                                     'derivatives': 'finite_difference'})
        assert spec.chart.policy.kind == FINITE_DIFFERENCE

    def test_dual_document(self):
        spec = parse_chart_document({'family': 'sphere', 'params': {'m': 2, 't': 2, 'c': 3.0}, 'dual': True})
        assert spec.surface.closed_form.epsilon == -1

    def test_constraint_violation_passes_through(self):
        with pytest.raises(ConstraintViolation):
            parse_chart_document({'family': 'sphere', 'params': {'m': 2, 't': 1, 'c': 0.5}})

    def test_bad_params(self):
        with pytest.raises(ChartSpecError):
            parse_chart_document({'family': 'sphere', 'params': {'m': 2, 't': 1}})

    @pytest.mark.parametrize("document", [[], {}, {'family': 'torus'}])
    def test_not_a_chart(self, document):
        with pytest.raises(ChartSpecError):
            parse_chart_document(document)


class TestLoading:

    def test_load_from_file(self, tmp_path):
        path = tmp_path / 'sphere.json'
        path.write_text(json.dumps(UNIT_SPHERE), encoding='utf-8')
        assert load_chart_spec(str(path)).chart.m == 2

    def test_invalid_json(self, tmp_path):
        path = tmp_path / 'broken.json'
        path.write_text('{"family": ', encoding='utf-8')
        with pytest.raises(ChartSpecError, match="invalid JSON"):
            load_chart_spec(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_chart_spec(str(tmp_path / 'absent.json'))
