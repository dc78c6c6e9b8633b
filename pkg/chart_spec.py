"""
Chart specification documents
Builds immersion charts from JSON documents naming a catalog family or custom coordinate expressions
"""
import json
import logging
import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
import sympy
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

from catalog import FAMILIES, CatalogSurface, ConstraintViolation, dual, table_entry
from immersion import DerivativePolicy, ImmersionChart
from space_form import SpaceForm

logger = logging.getLogger(__name__)

CATALOG_KEYS = {'family', 'params', 'orientation', 'derivatives', 'step', 'hessian_step', 'dual'}
CUSTOM_KEYS = {'family', 'ambient', 'coordinates', 'domain', 'constants', 'orientation',
               'derivatives', 'step', 'hessian_step'}
AMBIENT_KEYS = {'dim', 'index', 'curvature'}

ALLOWED_FUNCTIONS = {
    'sin': sympy.sin,
    'cos': sympy.cos,
    'sinh': sympy.sinh,
    'cosh': sympy.cosh,
    'sqrt': sympy.sqrt,
}
ALLOWED_CONSTANTS = {'pi': sympy.pi, 'e': sympy.E}
_TOKEN = re.compile(r'[A-Za-z_][A-Za-z_0-9]*')
_ALLOWED_CHARS = re.compile(r'^[A-Za-z_0-9+\-*/^().\s]*$')


class ChartSpecError(ValueError):
    """Malformed chart document or disallowed expression"""


@dataclass(frozen=True)
class ChartSpec:
    """A parsed chart document"""
    chart: ImmersionChart
    surface: Optional[CatalogSurface]
    orientation: int
    document: dict


# ============================================
# Expression grammar
# ============================================

def parse_expression(text: str, variables: Dict[str, sympy.Symbol],
                     constants: Optional[Dict[str, float]] = None) -> sympy.Expr:
    """
    Parse an arithmetic expression over +, -, *, /, ^, parentheses, numbers,
    the chart variables, named constants and sin, cos, sinh, cosh, sqrt.
    """
    constants = constants or {}
    if not isinstance(text, str) or not text.strip():
        raise ChartSpecError("coordinate expressions must be non-empty strings")
    if not _ALLOWED_CHARS.match(text) or '__' in text:
        raise ChartSpecError(f"expression {text!r} contains disallowed characters")

    names: Dict[str, object] = {}
    names.update(ALLOWED_FUNCTIONS)
    names.update(ALLOWED_CONSTANTS)
    names.update({name: sympy.Float(value) for name, value in constants.items()})
    names.update(variables)
    for token in _TOKEN.findall(text):
        if token not in names and not re.fullmatch(r'[eE]\d*', token):
            raise ChartSpecError(f"unknown name {token!r} in expression {text!r}")

    try:
        expr = parse_expr(text, local_dict=names, global_dict={'Integer': sympy.Integer, 'Float': sympy.Float,
                                                                'Rational': sympy.Rational, 'Symbol': sympy.Symbol},
                          transformations=standard_transformations + (convert_xor,))
    except (SyntaxError, TypeError, ValueError, sympy.SympifyError) as exc:
        raise ChartSpecError(f"cannot parse expression {text!r}: {exc}") from exc

    if not isinstance(expr, sympy.Expr):
        raise ChartSpecError(f"expression {text!r} is not arithmetic")
    stray = expr.free_symbols - set(variables.values())
    if stray:
        raise ChartSpecError(f"expression {text!r} uses unknown symbols {sorted(map(str, stray))}")
    return expr


def _symbolic_chart(ambient: SpaceForm, exprs: List[sympy.Expr], symbols: List[sympy.Symbol],
                    domain: Tuple[Tuple[float, float], ...], policy: DerivativePolicy,
                    name: str) -> ImmersionChart:
    m = len(symbols)
    n = len(exprs)
    first = [[sympy.diff(expr, sym) for expr in exprs] for sym in symbols]
    second = [[[sympy.diff(expr, a, b) for expr in exprs] for b in symbols] for a in symbols]

    point_fn = sympy.lambdify(symbols, exprs, 'numpy')
    jac_fn = sympy.lambdify(symbols, first, 'numpy')
    hess_fn = sympy.lambdify(symbols, second, 'numpy')

    def as_array(values, shape):
        return np.array(values, dtype=float).reshape(shape)

    def point(u):
        return as_array(point_fn(*u), (n,))

    def jacobian(u):
        return as_array(jac_fn(*u), (m, n))

    def hessian(u):
        return as_array(hess_fn(*u), (m, m, n))

    return ImmersionChart(ambient=ambient, map=point, domain=domain, jacobian=jacobian,
                          hessian=hessian, policy=policy, name=name)


# ============================================
# Documents
# ============================================

def _check_keys(document: dict, allowed: set, where: str):
    unknown = set(document) - allowed
    if unknown:
        raise ChartSpecError(f"unknown keys in {where}: {sorted(unknown)}")


def _policy(document: dict) -> DerivativePolicy:
    kind = document.get('derivatives', 'analytic')
    if kind == 'analytic':
        if 'step' in document or 'hessian_step' in document:
            raise ChartSpecError("step settings only apply to finite_difference derivatives")
        return DerivativePolicy()
    if kind == 'finite_difference':
        return DerivativePolicy.finite_difference(document.get('step'), document.get('hessian_step'))
    raise ChartSpecError(f"derivatives must be 'analytic' or 'finite_difference', got {kind!r}")


def _orientation(document: dict) -> int:
    orientation = document.get('orientation', 1)
    if orientation not in (1, -1):
        raise ChartSpecError(f"orientation must be 1 or -1, got {orientation!r}")
    return orientation


def _catalog_spec(document: dict) -> ChartSpec:
    _check_keys(document, CATALOG_KEYS, 'catalog chart document')
    family = document['family']
    params = document.get('params', {})
    if not isinstance(params, dict):
        raise ChartSpecError("params must be an object")
    try:
        surface = table_entry(family, params)
        if document.get('dual', False):
            surface = dual(surface)
    except ConstraintViolation:
        raise
    except ValueError as exc:
        raise ChartSpecError(str(exc)) from exc
    policy = _policy(document)
    chart = surface.chart
    if policy.kind != chart.policy.kind:
        chart = chart.with_finite_differences(policy.step, policy.hessian_step)
    return ChartSpec(chart, surface, _orientation(document), document)


def _custom_spec(document: dict) -> ChartSpec:
    _check_keys(document, CUSTOM_KEYS, 'custom chart document')
    for key in ('ambient', 'coordinates', 'domain'):
        if key not in document:
            raise ChartSpecError(f"custom chart document needs '{key}'")
    ambient_doc = document['ambient']
    if not isinstance(ambient_doc, dict):
        raise ChartSpecError("ambient must be an object")
    _check_keys(ambient_doc, AMBIENT_KEYS, 'ambient')
    try:
        ambient = SpaceForm(int(ambient_doc['dim']), int(ambient_doc.get('index', 0)),
                            float(ambient_doc.get('curvature', 0.0)))
    except KeyError as exc:
        raise ChartSpecError("ambient needs 'dim'") from exc

    m = ambient.dim - 1
    domain_doc = document['domain']
    if not isinstance(domain_doc, list) or len(domain_doc) != m:
        raise ChartSpecError(f"domain must list {m} intervals")
    domain = []
    for interval in domain_doc:
        if not isinstance(interval, list) or len(interval) != 2:
            raise ChartSpecError(f"domain interval must be [lo, hi], got {interval!r}")
        domain.append((float(interval[0]), float(interval[1])))

    coordinates = document['coordinates']
    n = ambient.flat_model.dim
    if not isinstance(coordinates, list) or len(coordinates) != n:
        raise ChartSpecError(f"{ambient.label} needs {n} coordinate expressions")

    constants = document.get('constants', {})
    if not isinstance(constants, dict):
        raise ChartSpecError("constants must be an object")
    symbols = [sympy.Symbol(f'u{i + 1}', real=True) for i in range(m)]
    variables = {str(sym): sym for sym in symbols}
    clash = set(constants) & (set(variables) | set(ALLOWED_FUNCTIONS) | set(ALLOWED_CONSTANTS))
    if clash:
        raise ChartSpecError(f"constant names clash with reserved names: {sorted(clash)}")
    exprs = [parse_expression(text, variables, constants) for text in coordinates]

    try:
        chart = _symbolic_chart(ambient, exprs, symbols, tuple(domain), _policy(document), 'custom')
    except ValueError as exc:
        raise ChartSpecError(str(exc)) from exc
    logger.debug(f"Custom chart over {ambient.label} with {m} variables")
    return ChartSpec(chart, None, _orientation(document), document)


def parse_chart_document(document: dict) -> ChartSpec:
    """Build a chart from a parsed document (catalog family or 'custom')"""
    if not isinstance(document, dict):
        raise ChartSpecError("chart document must be a JSON object")
    family = document.get('family')
    if family is None:
        raise ChartSpecError("chart document needs a 'family'")
    if family == 'custom':
        return _custom_spec(document)
    if family not in FAMILIES:
        raise ChartSpecError(f"unknown family {family!r}")
    return _catalog_spec(document)


def load_chart_spec(path: str) -> ChartSpec:
    """Read and parse a chart document from a JSON file"""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            document = json.load(f)
    except json.JSONDecodeError as exc:
        raise ChartSpecError(f"{path}: invalid JSON ({exc})") from exc
    return parse_chart_document(document)
