"""
r-harmonicity criteria for CMC hypersurfaces
Residuals, verdicts, the Clifford cubic, tension-field assembly and the Lorentz-3 solution list
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from catalog import (TRACELESS_A2, TRIHARMONIC_A2, CatalogSurface, bscroll_surface,
                     clifford_invariants, complex_circle_from_a2, dual,
                     pseudo_sphere_slice, sphere_product)
from config import lab_config
from immersion import ImmersionChart, ShapeReport, chart_normal, gradient_and_laplacian, shape_report

logger = logging.getLogger(__name__)

MINIMAL = 'minimal'
PROPER = 'proper_r_harmonic'
NOT_HARMONIC = 'not_r_harmonic'
BORDERLINE = 'borderline'

SPACE_LIKE_RIGID = 'space_like_rigid'
SIGN_OBSTRUCTION = 'sign_obstruction'


# ============================================
# Inputs and reports
# ============================================

@dataclass(frozen=True)
class HarmonicityInput:
    """Scalar data of a CMC hypersurface with constant trA2 in N^{m+1}_t(c)"""
    m: int
    c: float
    epsilon: int
    alpha: float
    trA2: float
    r: int

    def __post_init__(self):
        if self.r < 2:
            raise ValueError(f"order r must be >= 2, got {self.r}")
        if self.m < 1:
            raise ValueError(f"dimension m must be positive, got {self.m}")
        if self.epsilon not in (-1, 1):
            raise ValueError(f"epsilon must be +1 or -1, got {self.epsilon}")
        if self.m < 2:
            logger.warning("m < 2: verdicts are algebraic only")

    @property
    def alpha2(self) -> float:
        return self.alpha * self.alpha

    def with_order(self, r: int) -> 'HarmonicityInput':
        return HarmonicityInput(self.m, self.c, self.epsilon, self.alpha, self.trA2, r)

    def to_dict(self) -> dict:
        return {'m': self.m, 'c': self.c, 'epsilon': self.epsilon, 'alpha': self.alpha,
                'trA2': self.trA2, 'r': self.r}


@dataclass(frozen=True)
class HarmonicityReport:
    input: HarmonicityInput
    residual_biharmonic: float
    residual_traceA2: float
    residual_main: float
    verdict: str
    active_branch: str
    flags: Tuple[str, ...] = ()
    tol: float = 0.0
    provenance: str = 'closed_form'

    def to_dict(self) -> dict:
        return {
            'input': self.input.to_dict(),
            'residual_biharmonic': self.residual_biharmonic,
            'residual_traceA2': self.residual_traceA2,
            'residual_main': self.residual_main,
            'verdict': self.verdict,
            'active_branch': self.active_branch,
            'flags': list(self.flags),
            'tol': self.tol,
            'provenance': self.provenance,
        }


def input_from_report(report: ShapeReport, ambient_curvature: float, r: int) -> HarmonicityInput:
    """Harmonicity input from a numerically sampled shape report"""
    return HarmonicityInput(m=report.A_coord.shape[0], c=ambient_curvature, epsilon=report.epsilon,
                            alpha=report.f, trA2=report.trA2, r=r)


# ============================================
# Residuals and verdicts
# ============================================

def biharmonic_residual(inp: HarmonicityInput) -> float:
    """eps trA2 - m c"""
    return inp.epsilon * inp.trA2 - inp.m * inp.c


def r_harmonic_residuals(inp: HarmonicityInput) -> Tuple[float, float]:
    """(trA2, eps trA2^2 - m c trA2 - (r-2) m^2 c alpha^2)"""
    main = (inp.epsilon * inp.trA2 ** 2 - inp.m * inp.c * inp.trA2
            - (inp.r - 2) * inp.m ** 2 * inp.c * inp.alpha2)
    return inp.trA2, main


def _flags(inp: HarmonicityInput, tol: float) -> Tuple[str, ...]:
    """Rigidity flags; trA2 within tol of zero counts as zero"""
    flags = []
    if inp.epsilon == -1 and inp.c >= 0 and inp.r >= 3 and inp.trA2 >= -tol:
        flags.append(SPACE_LIKE_RIGID)
    if inp.trA2 > tol and inp.epsilon * inp.c < 0:
        flags.append(SIGN_OBSTRUCTION)
    return tuple(flags)


def classify(inp: HarmonicityInput, tol: Optional[float] = None,
             provenance: str = 'closed_form') -> HarmonicityReport:
    """
    Verdict for the CMC / constant-trA2 data in `inp`.

    r = 2 uses the biharmonic residual, r >= 3 the smaller of the trA2 = 0 and
    main-equation residuals. Residuals in (tol, 100 tol) give `borderline`.
    The rigidity flags force not_r_harmonic for non-minimal data.
    """
    tol = lab_config.tol if tol is None else tol
    bih = biharmonic_residual(inp)
    trace_res, main = r_harmonic_residuals(inp)
    flags = _flags(inp, tol)

    def build(verdict: str, branch: str) -> HarmonicityReport:
        return HarmonicityReport(inp, bih, trace_res, main, verdict, branch, flags, tol, provenance)

    if abs(inp.alpha) <= tol:
        return build(MINIMAL, 'none')
    if flags:
        logger.debug(f"Flags {flags} force a non-harmonic verdict")
        return build(NOT_HARMONIC, 'none')

    if inp.r == 2:
        branch, residual = 'biharmonic', abs(bih)
    elif abs(trace_res) <= abs(main):
        branch, residual = 'trA2_zero', abs(trace_res)
    else:
        branch, residual = 'main_equation', abs(main)

    if residual <= tol:
        return build(PROPER, branch)
    if residual < 100.0 * tol:
        logger.info(f"Borderline verdict on branch {branch}: residual {residual:.3e}, tol {tol:.1e}")
        return build(BORDERLINE, branch)
    return build(NOT_HARMONIC, 'none')


def flat_isoparametric_check(jordan_tag: str, trA: float, trA2: float, r: int,
                             tol: Optional[float] = None) -> dict:
    """
    Isoparametric Lorentzian hypersurface of a flat ambient: r-harmonic (r >= 3)
    forces trA2 = 0, which a non-minimal shape operator only reaches in type IV.
    """
    tol = lab_config.tol if tol is None else tol
    minimal = abs(trA) <= tol
    trace_zero = abs(trA2) <= tol
    if r < 3:
        logger.warning("flat_isoparametric_check applies to r >= 3")
    compatible = minimal or (trace_zero and jordan_tag == 'IV')
    if minimal:
        reason = 'minimal'
    elif not trace_zero:
        reason = 'trA2 != 0 leaves no r-harmonic branch in a flat ambient'
    elif jordan_tag != 'IV':
        reason = f'trA2 = 0 with type {jordan_tag} forces a zero shape operator'
    else:
        reason = 'type IV with trA2 = 0'
    return {'minimal': minimal, 'trA2_zero': trace_zero, 'compatible': compatible, 'reason': reason}


# ============================================
# Clifford cubic
# ============================================

@dataclass(frozen=True)
class P3Root:
    root: float
    admissible: bool
    minimal: bool

    def to_dict(self) -> dict:
        return {'root': self.root, 'admissible': self.admissible, 'minimal': self.minimal}


def p3_eval(c: float, m: int, k: int, r: int) -> float:
    """k c^3 - k(r+2) c^2 + [m(r-1) + k(r+2)] c - m r"""
    return k * c ** 3 - k * (r + 2) * c ** 2 + (m * (r - 1) + k * (r + 2)) * c - m * r


def _p3_derivative(c: float, m: int, k: int, r: int) -> float:
    return 3 * k * c ** 2 - 2 * k * (r + 2) * c + (m * (r - 1) + k * (r + 2))


def solve_cubic(a: float, b: float, c: float, d: float) -> List[float]:
    """Real roots of a x^3 + b x^2 + c x + d via the depressed cubic"""
    if a == 0:
        raise ValueError("leading coefficient must be non-zero")
    b, c, d = b / a, c / a, d / a
    shift = -b / 3.0
    p = c - b * b / 3.0
    q = 2.0 * b ** 3 / 27.0 - b * c / 3.0 + d
    scale = max(1.0, abs(b), abs(c), abs(d))
    if abs(p) <= 1e-14 * scale and abs(q) <= 1e-14 * scale:
        return [shift]
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if disc > 0:
        root = math.sqrt(disc)
        t = np.cbrt(-q / 2.0 + root) + np.cbrt(-q / 2.0 - root)
        return [float(t) + shift]
    # three real roots (two coincide when disc == 0)
    radius = 2.0 * math.sqrt(-p / 3.0)
    argument = max(-1.0, min(1.0, 3.0 * q / (p * radius)))
    theta = math.acos(argument) / 3.0
    return sorted(radius * math.cos(theta - 2.0 * math.pi * j / 3.0) + shift for j in range(3))


def p3_roots(m: int, k: int, r: int, tol: Optional[float] = None) -> List[P3Root]:
    """
    Real roots of P3 with admissibility (c > 1) and minimality (ck = m) flags.

    Closed-form roots get one Newton step; coincident roots are merged.
    """
    tol = lab_config.tol if tol is None else tol
    if not 1 <= k <= m - 1:
        raise ValueError(f"p3_roots requires 1 <= k <= m-1, got m={m}, k={k}")
    if r < 3:
        raise ValueError(f"p3_roots requires r >= 3, got r={r}")

    raw = solve_cubic(k, -k * (r + 2), m * (r - 1) + k * (r + 2), -m * r)
    polished = []
    for root in raw:
        slope = _p3_derivative(root, m, k, r)
        if abs(slope) > 1e-8:
            root = root - p3_eval(root, m, k, r) / slope
        polished.append(root)

    merged: List[float] = []
    for root in sorted(polished):
        if merged and abs(root - merged[-1]) <= 1e-6 * max(1.0, abs(root)):
            continue
        merged.append(root)

    roots = []
    for root in merged:
        residual = abs(p3_eval(root, m, k, r))
        if residual > 1e-9:
            logger.warning(f"P3 root {root:.12g} has residual {residual:.2e}")
        roots.append(P3Root(root=float(root), admissible=root > 1.0, minimal=abs(root * k - m) <= tol))
    return roots


def clifford_residual(m: int, k: int, c: float, r: int) -> float:
    """Main residual of S^k(c) x S^{m-k}(c/(c-1)) in S^{m+1} (eps = 1, ambient c = 1)"""
    trA2, alpha2 = clifford_invariants(m, k, c)
    inp = HarmonicityInput(m=m, c=1.0, epsilon=1, alpha=math.sqrt(alpha2), trA2=trA2, r=r)
    return r_harmonic_residuals(inp)[1]


# ============================================
# Tension field
# ============================================

def tau_r_closed(inp: HarmonicityInput) -> float:
    """(1/m) tau_r = alpha eps^r trA2^(r-3) (eps trA2^2 - m c trA2 - (r-2) m^2 c alpha^2)"""
    if inp.r < 3:
        raise ValueError("tau_r_closed requires r >= 3")
    _, main = r_harmonic_residuals(inp)
    return inp.alpha * inp.epsilon ** inp.r * inp.trA2 ** (inp.r - 3) * main


def laplacian_power_coefficient(inp: HarmonicityInput, p: int) -> float:
    """Coefficient of eta in the p-th rough-Laplacian power of H: alpha eps^p trA2^p"""
    if p < 0:
        return 0.0
    return inp.alpha * inp.epsilon ** p * inp.trA2 ** p


def tau_r_assembled(inp: HarmonicityInput) -> float:
    """
    (1/m) tau_{2s} summed group by group with tau = m H:

      leading term      m * coef(2s-1)
      curvature term    c m (m coef(2s-2))
      paired sums       for l = 1..s-1, c m^2 coef(s+l-2) coef(s-l-1) trA, once per sign
    """
    if inp.r % 2:
        logger.info(f"Odd order r={inp.r}: assembled route delegates to the closed form")
        return tau_r_closed(inp)
    s = inp.r // 2
    if s < 2:
        raise ValueError("tau_r_assembled requires r = 2s with s >= 2")
    m, c = inp.m, inp.c
    trace_A = m * inp.epsilon * inp.alpha

    leading = m * laplacian_power_coefficient(inp, 2 * s - 1)
    single = c * m * (m * laplacian_power_coefficient(inp, 2 * s - 2))
    paired = 0.0
    for l in range(1, s):
        outer = laplacian_power_coefficient(inp, s + l - 2)
        inner = laplacian_power_coefficient(inp, s - l - 1)
        paired += 2 * m ** 2 * c * outer * inner * trace_A
    return (leading - single - paired) / m


# ============================================
# Field residuals along a chart
# ============================================

@dataclass(frozen=True)
class FieldResidual:
    point: np.ndarray
    scalar_residual: float
    vector_residual: np.ndarray
    f: float
    trA2: float

    def to_dict(self) -> dict:
        return {'point': [float(v) for v in self.point], 'scalar_residual': self.scalar_residual,
                'vector_residual': [float(v) for v in self.vector_residual], 'f': self.f, 'trA2': self.trA2}


def _field_residual(chart: ImmersionChart, u: np.ndarray, h_outer: float, tol: float,
                    normal: np.ndarray) -> FieldResidual:
    report = shape_report(chart, u, tol, reference_normal=normal)
    m, c = chart.m, chart.ambient.curvature

    def trace_square(v):
        return shape_report(chart, v, tol).trA2

    trA2, grad, laplacian = gradient_and_laplacian(chart, trace_square, u, h_outer, tol)
    scalar = (laplacian + report.epsilon * trA2 ** 2 - m * c * trA2 - m ** 2 * c * report.f ** 2)
    vector = report.A_coord @ grad
    return FieldResidual(point=np.asarray(u, dtype=float), scalar_residual=float(scalar),
                         vector_residual=vector, f=report.f, trA2=trA2)


def triharmonic_field_residuals(chart: ImmersionChart, grid: Sequence, h_outer: Optional[float] = None,
                                tol: Optional[float] = None, cmc_tol: float = 1e-6,
                                workers: Optional[int] = None,
                                reference_normal=None) -> List[FieldResidual]:
    """
    Per-point residuals of the triharmonic system
      Delta trA2 + eps trA2^2 - m c trA2 - m^2 c f^2 = 0,   A(grad trA2) = 0

    Normals follow reference_normal, by default the normal at the chart centre.
    """
    h_outer = lab_config.field_step if h_outer is None else h_outer
    tol = lab_config.tol if tol is None else tol
    workers = lab_config.workers if workers is None else workers
    points = [np.asarray(u, dtype=float) for u in grid]
    normal = chart_normal(chart, tol) if reference_normal is None else np.asarray(reference_normal, dtype=float)

    results: List[Optional[FieldResidual]] = [None] * len(points)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        future_to_index = {
            executor.submit(_field_residual, chart, u, h_outer, tol, normal): i
            for i, u in enumerate(points)
        }
        for future in as_completed(future_to_index):
            index = future_to_index[future]
            try:
                results[index] = future.result()
            except Exception as e:
                logger.error(f"{chart.name}: field residual failed at {points[index]}: {e}")
                raise

    f_values = [res.f for res in results]
    if max(f_values) - min(f_values) > cmc_tol:
        logger.warning(f"{chart.name}: mean curvature varies by {max(f_values) - min(f_values):.2e} on the grid")
    return results


# ============================================
# Sampled chart checks
# ============================================

@dataclass(frozen=True)
class ChartCheck:
    chart_name: str
    points: int
    f_spread: float
    trA2_spread: float
    cmc: bool
    report: Optional[HarmonicityReport]
    field_residuals: List[FieldResidual] = field(default_factory=list)

    def to_dict(self) -> dict:
        fields = self.field_residuals
        return {
            'chart': self.chart_name,
            'points': self.points,
            'f_spread': self.f_spread,
            'trA2_spread': self.trA2_spread,
            'cmc': self.cmc,
            'harmonicity': self.report.to_dict() if self.report else None,
            'max_scalar_residual': max((abs(fr.scalar_residual) for fr in fields), default=None),
            'max_vector_residual': max((float(np.max(np.abs(fr.vector_residual))) for fr in fields), default=None),
        }


def check_chart(chart: ImmersionChart, r: int, grid: Sequence, tol: float = 1e-6,
                constancy_tol: float = 1e-6, orientation: int = 1) -> ChartCheck:
    """
    Sample a chart, test constancy of f and trA2, then classify with the mean
    values; r = 3 adds the triharmonic field residuals.
    """
    normal = chart_normal(chart, orientation=orientation)
    reports = [shape_report(chart, u, reference_normal=normal) for u in grid]
    f_values = np.array([rep.f for rep in reports])
    traces = np.array([rep.trA2 for rep in reports])
    f_spread = float(np.ptp(f_values))
    trA2_spread = float(np.ptp(traces))
    cmc = f_spread <= constancy_tol and trA2_spread <= constancy_tol

    report = None
    if cmc:
        inp = HarmonicityInput(m=chart.m, c=chart.ambient.curvature, epsilon=reports[0].epsilon,
                               alpha=float(np.mean(f_values)), trA2=float(np.mean(traces)), r=r)
        report = classify(inp, tol, provenance='sampled')
    else:
        logger.warning(f"{chart.name}: f or trA2 not constant (spreads {f_spread:.2e}, {trA2_spread:.2e})")

    fields = triharmonic_field_residuals(chart, grid, reference_normal=normal) if r == 3 else []
    return ChartCheck(chart.name, len(reports), f_spread, trA2_spread, cmc, report, fields)


# ============================================
# Lorentz-3 classification
# ============================================

@dataclass(frozen=True)
class ClassifiedSolution:
    """One case of the r-harmonic surfaces of a three-dimensional Lorentzian space form"""
    case: str
    description: str
    ambient: str
    params: dict
    builder: Callable[[], CatalogSurface]

    def instantiate(self) -> CatalogSurface:
        return self.builder()

    def verify(self, r: int, tol: float = 1e-6) -> HarmonicityReport:
        """Re-derive the invariants numerically at the chart centre and classify"""
        surface = self.instantiate()
        report = shape_report(surface.chart, surface.chart.center())
        return classify(input_from_report(report, surface.chart.ambient.curvature, r), tol, provenance='sampled')

    def to_dict(self) -> dict:
        return {'case': self.case, 'description': self.description, 'ambient': self.ambient,
                'params': dict(self.params)}


def lorentz3_solutions(r: int) -> List[ClassifiedSolution]:
    """Proper r-harmonic surfaces of S^3_1 and H^3_1, r >= 3"""
    if r < 3:
        raise ValueError(f"lorentz3_solutions requires r >= 3, got r={r}")
    solutions = [
        ClassifiedSolution('1', f"small pseudo-sphere S^2_1({r})", 'S^3_1', {'c': float(r)},
                           lambda: pseudo_sphere_slice(2, 1, float(r))),
        ClassifiedSolution('2', f"hyperbolic plane H^2({-r})", 'H^3_1', {'c': float(-r)},
                           lambda: dual(pseudo_sphere_slice(2, 2, float(r)))),
    ]

    torus_roots = [root.root for root in p3_roots(2, 1, r) if root.admissible and not root.minimal]
    for c in torus_roots:
        solutions.append(ClassifiedSolution(
            '3', f"S^1({c:.6g}) x S^1_1({c / (c - 1):.6g})", 'S^3_1', {'c': c},
            lambda c=c: sphere_product(2, 1, 1, 0, c)))
    for c in torus_roots:
        solutions.append(ClassifiedSolution(
            '4', f"H^1({-c:.6g}) x H^1({-c / (c - 1):.6g})", 'H^3_1', {'c': c},
            lambda c=c: dual(sphere_product(2, 2, 1, 1, c))))

    lam = math.sqrt(r - 1.0)
    solutions.append(ClassifiedSolution(
        '5', f"B-scroll with lambda^2 = {r - 1}, Gauss curvature K = {r}", 'S^3_1', {'lambda': lam},
        lambda: bscroll_surface(lam)))
    solutions.append(ClassifiedSolution(
        '6a', "complex circle with trA2 = 0", 'H^3_1', {'a2': TRACELESS_A2},
        lambda: complex_circle_from_a2(TRACELESS_A2)))
    if r == 3:
        solutions.append(ClassifiedSolution(
            '6b', "complex circle with trA2 = -1", 'H^3_1', {'a2': TRIHARMONIC_A2},
            lambda: complex_circle_from_a2(TRIHARMONIC_A2)))
    return solutions
