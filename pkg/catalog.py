"""
Catalog of hypersurface families
Charts with analytic derivatives and closed-form invariants for every tabulated family
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import lab_config
from immersion import ImmersionChart, ShapeReport, shape_report
from pgeom_core import GeometryError, Signature
from space_form import SpaceForm, flat, hyperbolic, sphere

logger = logging.getLogger(__name__)


class ConstraintViolation(GeometryError, ValueError):
    """Family parameters violate an admissibility inequality"""


# ============================================
# Closed forms
# ============================================

@dataclass(frozen=True)
class ClosedForm:
    """Closed-form shape data of a family (the '+' branch of every '+/-' entry)"""
    epsilon: int
    A: np.ndarray
    ambient_curvature: float
    description: str
    jordan_tag: str = 'I'

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def trA(self) -> float:
        return float(np.trace(self.A))

    @property
    def trA2(self) -> float:
        return float(np.trace(self.A @ self.A))

    @property
    def f(self) -> float:
        return self.epsilon * self.trA / self.m

    @property
    def gauss_curvature(self) -> Optional[float]:
        if self.m != 2:
            return None
        return float(self.ambient_curvature + self.epsilon * np.linalg.det(self.A))

    def to_dict(self) -> dict:
        return {
            'description': self.description,
            'epsilon': self.epsilon,
            'A': self.A.tolist(),
            'f': self.f,
            'trA2': self.trA2,
            'jordan': self.jordan_tag,
            'gauss_curvature': self.gauss_curvature,
        }


def _spectrum_error(numeric: np.ndarray, closed: np.ndarray) -> float:
    """Largest distance in a greedy nearest matching of two eigenvalue lists"""
    remaining = list(numeric)
    worst = 0.0
    for value in closed:
        idx = int(np.argmin([abs(value - v) for v in remaining]))
        worst = max(worst, abs(value - remaining.pop(idx)))
    return worst


@dataclass(frozen=True)
class CatalogSurface:
    """A tabulated family instance: analytic chart plus closed-form invariants"""
    name: str
    family: str
    params: Dict[str, float]
    chart: ImmersionChart
    closed_form: ClosedForm
    constraints: Tuple[str, ...] = ()

    def compare(self, report: ShapeReport, tol: float) -> dict:
        """Numeric ShapeReport against the closed form; A, f up to global sign"""
        closed = self.closed_form
        numeric_eig = np.linalg.eigvals(report.A_coord)
        closed_eig = np.linalg.eigvals(closed.A)
        spectrum = min(_spectrum_error(numeric_eig, closed_eig),
                       _spectrum_error(numeric_eig, -closed_eig))
        f_error = min(abs(report.f - closed.f), abs(report.f + closed.f))
        trA2_error = abs(report.trA2 - closed.trA2)
        scale = max(1.0, abs(closed.trA2))
        # defective closed forms split numerically by about sqrt(noise)
        spectrum_tol = math.sqrt(tol) if closed.jordan_tag == 'II' else tol
        passed = (report.epsilon == closed.epsilon and f_error <= tol * scale
                  and trA2_error <= tol * scale and spectrum <= spectrum_tol * scale)
        return {
            'epsilon_ok': report.epsilon == closed.epsilon,
            'f_error': f_error,
            'trA2_error': trA2_error,
            'spectrum_error': spectrum,
            'passed': bool(passed),
        }


# ============================================
# Quadric graph charts
# ============================================

class QuadricGraph:
    """
    Graph chart of an intersection of quadric blocks in a flat space.

    Each block {x : sum_{i in block} s_i x_i^2 = level} is charted by all its
    coordinates except one, solved as y = sqrt((level - sum s_a u_a^2) / s_y);
    the solved coordinate is the last spacelike one for positive levels and
    the last timelike one for negative levels. Remaining coordinates are fixed.
    """

    def __init__(self, signature: Signature, blocks: Sequence[Tuple[Sequence[int], float]],
                 fixed: Optional[Dict[int, float]] = None):
        self.signature = signature
        self.fixed = dict(fixed or {})
        signs = signature.signs
        self.blocks = []
        for coords, level in blocks:
            coords = list(coords)
            wanted = 1.0 if level > 0 else -1.0
            candidates = [i for i in coords if signs[i] == wanted]
            if not candidates:
                raise ConstraintViolation(
                    f"quadric block {coords} with level {level:g} has no coordinate of sign {wanted:+g}"
                )
            solved = candidates[-1]
            free = [i for i in coords if i != solved]
            self.blocks.append((free, solved, float(level)))
        self.m = sum(len(free) for free, _, _ in self.blocks)

    def domain(self) -> Tuple[Tuple[float, float], ...]:
        box = []
        for free, _, level in self.blocks:
            half = 0.5 * math.sqrt(abs(level) / max(1, len(free)))
            box.extend([(-half, half)] * len(free))
        return tuple(box)

    def _solve(self, free: List[int], solved: int, level: float, values: np.ndarray) -> float:
        signs = self.signature.signs
        q = (level - float(np.sum(signs[free] * values ** 2))) / signs[solved]
        if q <= 0:
            raise GeometryError(f"point leaves the quadric graph domain (solved square {q:.3e})")
        return math.sqrt(q)

    def point(self, u: np.ndarray) -> np.ndarray:
        x = np.zeros(self.signature.dim)
        for idx, value in self.fixed.items():
            x[idx] = value
        offset = 0
        for free, solved, level in self.blocks:
            values = u[offset:offset + len(free)]
            x[free] = values
            x[solved] = self._solve(free, solved, level, values)
            offset += len(free)
        return x

    def jacobian(self, u: np.ndarray) -> np.ndarray:
        signs = self.signature.signs
        jac = np.zeros((self.m, self.signature.dim))
        offset = 0
        for free, solved, level in self.blocks:
            values = u[offset:offset + len(free)]
            y = self._solve(free, solved, level, values)
            for a, coord in enumerate(free):
                jac[offset + a, coord] = 1.0
                jac[offset + a, solved] = -signs[coord] * values[a] / (signs[solved] * y)
            offset += len(free)
        return jac

    def hessian(self, u: np.ndarray) -> np.ndarray:
        signs = self.signature.signs
        hess = np.zeros((self.m, self.m, self.signature.dim))
        offset = 0
        for free, solved, level in self.blocks:
            values = u[offset:offset + len(free)]
            y = self._solve(free, solved, level, values)
            s_y = signs[solved]
            dy = -signs[free] * values / (s_y * y)
            for a, coord in enumerate(free):
                for b in range(len(free)):
                    delta = 1.0 if a == b else 0.0
                    hess[offset + a, offset + b, solved] = (
                        -signs[coord] * delta / (s_y * y) + signs[coord] * values[a] * dy[b] / (s_y * y ** 2)
                    )
            offset += len(free)
        return hess

    def chart(self, ambient: SpaceForm, name: str) -> ImmersionChart:
        return ImmersionChart(ambient=ambient, map=self.point, domain=self.domain(),
                              jacobian=self.jacobian, hessian=self.hessian, name=name)


# ============================================
# Table families of S^{m+1}_t
# ============================================

def _require(condition: bool, family: str, inequality: str, params: dict):
    if not condition:
        shown = ', '.join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}" for k, v in params.items())
        raise ConstraintViolation(f"{family}: requires {inequality} (got {shown})")


def _check_dims(family: str, params: dict, min_t: int = 1):
    m, t = params['m'], params['t']
    _require(m >= 2, family, "m >= 2", params)
    _require(min_t <= t <= m, family, f"{min_t} <= t <= m", params)


def pseudo_sphere_slice(m: int, t: int, c: float) -> CatalogSurface:
    """S^m_t(c) = {x in S^{m+1}_t : x_{m+2} = sqrt(1 - 1/c)}"""
    params = {'m': m, 't': t, 'c': c}
    _check_dims('sphere', params)
    _require(c >= 1, 'sphere', "1 <= c", params)
    sig = Signature(m + 2, t)
    graph = QuadricGraph(sig, [(range(m + 1), 1.0 / c)], fixed={m + 1: math.sqrt(1.0 - 1.0 / c)})
    name = f"S^{m}_{t}({c:g})"
    closed = ClosedForm(epsilon=1, A=math.sqrt(c - 1.0) * np.eye(m), ambient_curvature=1.0,
                        description="sqrt(c-1) I")
    return CatalogSurface(name, 'sphere', params, graph.chart(sphere(m + 1, t), name), closed,
                          ("1 <= c",))


def low_index_sphere_slice(m: int, t: int, c: float) -> CatalogSurface:
    """S^m_{t-1}(c) = {x in S^{m+1}_t : x_1 = sqrt(1/c - 1)}"""
    params = {'m': m, 't': t, 'c': c}
    _check_dims('low_index_sphere', params)
    _require(0 < c <= 1, 'low_index_sphere', "0 < c <= 1", params)
    sig = Signature(m + 2, t)
    graph = QuadricGraph(sig, [(range(1, m + 2), 1.0 / c)], fixed={0: math.sqrt(1.0 / c - 1.0)})
    name = f"S^{m}_{t - 1}({c:g})"
    closed = ClosedForm(epsilon=-1, A=math.sqrt(1.0 - c) * np.eye(m), ambient_curvature=1.0,
                        description="sqrt(1-c) I")
    return CatalogSurface(name, 'low_index_sphere', params, graph.chart(sphere(m + 1, t), name), closed,
                          ("0 < c <= 1",))


class _FlatSlice:
    """R^m_{t-1} = {x_1 = x_{m+2} + a}: w = (x_2..x_{m+1}), x_{m+2} = (<w,w> - 1 - a^2) / 2a"""

    def __init__(self, m: int, t: int, a: float):
        self.m, self.a = m, a
        self.sig = Signature(m + 2, t)
        self.w_signs = self.sig.signs[1:m + 1]

    def point(self, w: np.ndarray) -> np.ndarray:
        last = (float(np.dot(self.w_signs * w, w)) - 1.0 - self.a ** 2) / (2.0 * self.a)
        return np.concatenate([[last + self.a], w, [last]])

    def jacobian(self, w: np.ndarray) -> np.ndarray:
        jac = np.zeros((self.m, self.m + 2))
        d_last = self.w_signs * w / self.a
        jac[:, 0] = d_last
        jac[:, 1:self.m + 1] = np.eye(self.m)
        jac[:, -1] = d_last
        return jac

    def hessian(self, w: np.ndarray) -> np.ndarray:
        hess = np.zeros((self.m, self.m, self.m + 2))
        second = np.diag(self.w_signs / self.a)
        hess[:, :, 0] = second
        hess[:, :, -1] = second
        return hess


def flat_slice(m: int, t: int, a: float = 1.0) -> CatalogSurface:
    """R^m_{t-1} = {x in S^{m+1}_t : x_1 = x_{m+2} + a}"""
    params = {'m': m, 't': t, 'a': a}
    _check_dims('flat_slice', params)
    _require(a > 0, 'flat_slice', "a > 0", params)
    piece = _FlatSlice(m, t, a)
    name = f"R^{m}_{t - 1}(a={a:g})"
    chart = ImmersionChart(ambient=sphere(m + 1, t), map=piece.point, domain=((-0.5, 0.5),) * m,
                           jacobian=piece.jacobian, hessian=piece.hessian, name=name)
    closed = ClosedForm(epsilon=-1, A=np.eye(m), ambient_curvature=1.0, description="I")
    return CatalogSurface(name, 'flat_slice', params, chart, closed, ("a > 0",))


def hyperbolic_slice(m: int, t: int, c: float) -> CatalogSurface:
    """H^m_{t-1}(c) = {x in S^{m+1}_t : x_{m+2} = sqrt(1 - 1/c)}, c < 0"""
    params = {'m': m, 't': t, 'c': c}
    _check_dims('hyperbolic_slice', params)
    _require(c < 0, 'hyperbolic_slice', "c < 0", params)
    sig = Signature(m + 2, t)
    graph = QuadricGraph(sig, [(range(m + 1), 1.0 / c)], fixed={m + 1: math.sqrt(1.0 - 1.0 / c)})
    name = f"H^{m}_{t - 1}({c:g})"
    closed = ClosedForm(epsilon=-1, A=math.sqrt(1.0 - c) * np.eye(m), ambient_curvature=1.0,
                        description="sqrt(1-c) I")
    return CatalogSurface(name, 'hyperbolic_slice', params, graph.chart(sphere(m + 1, t), name), closed,
                          ("c < 0",))


def _product_blocks(m: int, t: int, k: int, l: int, c: float) -> List[Tuple[List[int], float]]:
    first = list(range(l)) + list(range(t, t + k - l + 1))
    second = list(range(l, t)) + list(range(t + k - l + 1, m + 2))
    return [(first, 1.0 / c), (second, (c - 1.0) / c)]


def sphere_product(m: int, t: int, k: int, l: int, c: float) -> CatalogSurface:
    """S^k_l(c) x S^{m-k}_{t-l}(c/(c-1)) in S^{m+1}_t, c > 1"""
    params = {'m': m, 't': t, 'k': k, 'l': l, 'c': c}
    family = 'sphere_product'
    _check_dims(family, params, min_t=0)
    _require(c > 1, family, "c > 1", params)
    _require(1 <= k <= m - 1, family, "1 <= k <= m-1", params)
    _require(0 <= l <= k, family, "0 <= l <= k", params)
    _require(0 <= l <= t, family, "0 <= l <= t", params)
    _require(t - l <= m - k, family, "t-l <= m-k", params)
    graph = QuadricGraph(Signature(m + 2, t), _product_blocks(m, t, k, l, c))
    name = f"S^{k}_{l}({c:g}) x S^{m - k}_{t - l}({c / (c - 1.0):g})"
    root = math.sqrt(c - 1.0)
    A = np.diag([root] * k + [-1.0 / root] * (m - k))
    closed = ClosedForm(epsilon=1, A=A, ambient_curvature=1.0,
                        description="sqrt(c-1) I_k + (-sqrt(1/(c-1))) I_{m-k}")
    return CatalogSurface(name, family, params, graph.chart(sphere(m + 1, t), name), closed,
                          ("c > 1", "1 <= k <= m-1", "0 <= l <= k", "0 <= l <= t", "t-l <= m-k"))


def sphere_hyperbolic_product(m: int, t: int, k: int, l: int, c: float) -> CatalogSurface:
    """S^k_l(c) x H^{m-k}_{t-l-1}(c/(c-1)) in S^{m+1}_t, 0 < c < 1"""
    params = {'m': m, 't': t, 'k': k, 'l': l, 'c': c}
    family = 'sphere_hyperbolic_product'
    _check_dims(family, params)
    _require(0 < c < 1, family, "0 < c < 1", params)
    _require(1 <= k <= m - 1, family, "1 <= k <= m-1", params)
    _require(0 <= l <= k, family, "0 <= l <= k", params)
    _require(0 <= l <= t - 1, family, "0 <= l <= t-1", params)
    _require(t - l - 1 <= m - k, family, "t-l-1 <= m-k", params)
    graph = QuadricGraph(Signature(m + 2, t), _product_blocks(m, t, k, l, c))
    name = f"S^{k}_{l}({c:g}) x H^{m - k}_{t - l - 1}({c / (c - 1.0):g})"
    root = math.sqrt(1.0 - c)
    A = np.diag([root] * k + [1.0 / root] * (m - k))
    closed = ClosedForm(epsilon=-1, A=A, ambient_curvature=1.0,
                        description="sqrt(1-c) I_k + sqrt(1/(1-c)) I_{m-k}")
    return CatalogSurface(name, family, params, graph.chart(sphere(m + 1, t), name), closed,
                          ("0 < c < 1", "1 <= k <= m-1", "0 <= l <= k", "0 <= l <= t-1", "t-l-1 <= m-k"))


# ============================================
# Flat ambient quadrics
# ============================================

def flat_pseudo_sphere(m: int, t: int, c: float) -> CatalogSurface:
    """S^m_t(c) = {<x,x> = 1/c} in R^{m+1}_t"""
    params = {'m': m, 't': t, 'c': c}
    _require(m >= 2, 'flat_sphere', "m >= 2", params)
    _require(0 <= t <= m, 'flat_sphere', "0 <= t <= m", params)
    _require(c > 0, 'flat_sphere', "c > 0", params)
    graph = QuadricGraph(Signature(m + 1, t), [(range(m + 1), 1.0 / c)])
    name = f"S^{m}_{t}({c:g}) in R^{m + 1}_{t}"
    closed = ClosedForm(epsilon=1, A=math.sqrt(c) * np.eye(m), ambient_curvature=0.0,
                        description="sqrt(c) I")
    return CatalogSurface(name, 'flat_sphere', params, graph.chart(flat(m + 1, t), name), closed, ("c > 0",))


def flat_pseudo_hyperbolic(m: int, t: int, c: float) -> CatalogSurface:
    """H^m_{t-1}(c) = {<x,x> = 1/c} in R^{m+1}_t, c < 0"""
    params = {'m': m, 't': t, 'c': c}
    _require(m >= 2, 'flat_hyperbolic', "m >= 2", params)
    _require(1 <= t <= m + 1, 'flat_hyperbolic', "1 <= t <= m+1", params)
    _require(c < 0, 'flat_hyperbolic', "c < 0", params)
    graph = QuadricGraph(Signature(m + 1, t), [(range(m + 1), 1.0 / c)])
    name = f"H^{m}_{t - 1}({c:g}) in R^{m + 1}_{t}"
    closed = ClosedForm(epsilon=-1, A=math.sqrt(-c) * np.eye(m), ambient_curvature=0.0,
                        description="sqrt(-c) I")
    return CatalogSurface(name, 'flat_hyperbolic', params, graph.chart(flat(m + 1, t), name), closed, ("c < 0",))


# ============================================
# Invariants of the product tori
# ============================================

def clifford_invariants(m: int, k: int, c: float) -> Tuple[float, float]:
    """(trA2, alpha^2) of S^k x S^{m-k} with first factor curvature c"""
    params = {'m': m, 'k': k, 'c': c}
    _require(c > 1, 'clifford', "c > 1", params)
    _require(1 <= k <= m - 1, 'clifford', "1 <= k <= m-1", params)
    trA2 = k * (c - 1.0) + (m - k) / (c - 1.0)
    alpha2 = (c * k - m) ** 2 / (m ** 2 * (c - 1.0))
    return trA2, alpha2


# ============================================
# Complex circles in H^3_1
# ============================================

TRACELESS_A2 = math.sqrt(2.0) / 2.0 - 0.5
TRIHARMONIC_A2 = math.sqrt(3.0) / 3.0 - 0.5


class _ComplexCircle:
    def __init__(self, a: float, b: float):
        self.a, self.b = a, b

    def _terms(self, u):
        s, t = u
        return math.cos(s), math.sin(s), math.cosh(t), math.sinh(t)

    def point(self, u: np.ndarray) -> np.ndarray:
        a, b = self.a, self.b
        cs, sn, ch, sh = self._terms(u)
        return np.array([b * cs * ch - a * sn * sh,
                         a * cs * sh + b * sn * ch,
                         a * cs * ch + b * sn * sh,
                         b * cs * sh - a * sn * ch])

    def jacobian(self, u: np.ndarray) -> np.ndarray:
        a, b = self.a, self.b
        cs, sn, ch, sh = self._terms(u)
        d_s = [-b * sn * ch - a * cs * sh, -a * sn * sh + b * cs * ch,
               -a * sn * ch + b * cs * sh, -b * sn * sh - a * cs * ch]
        d_t = [b * cs * sh - a * sn * ch, a * cs * ch + b * sn * sh,
               a * cs * sh + b * sn * ch, b * cs * ch - a * sn * sh]
        return np.array([d_s, d_t])

    def hessian(self, u: np.ndarray) -> np.ndarray:
        a, b = self.a, self.b
        cs, sn, ch, sh = self._terms(u)
        x = self.point(u)
        d_st = np.array([-b * sn * sh - a * cs * ch, -a * sn * ch + b * cs * sh,
                         -a * sn * sh + b * cs * ch, -b * sn * ch - a * cs * sh])
        return np.array([[-x, d_st], [d_st, x]])


def complex_circle(a: float, b: float) -> CatalogSurface:
    """Complex circle in H^3_1 with b^2 - a^2 = 1, ab != 0 (shape operator of type IV)"""
    params = {'a': a, 'b': b}
    _require(abs(b * b - a * a - 1.0) <= 1e-12, 'complex_circle', "b^2 - a^2 = 1", params)
    _require(a * b != 0, 'complex_circle', "ab != 0", params)
    piece = _ComplexCircle(a, b)
    name = f"complex circle(a^2={a * a:.6g})"
    chart = ImmersionChart(ambient=hyperbolic(3, 1, -1.0), map=piece.point, domain=((-1.0, 1.0), (-1.0, 1.0)),
                           jacobian=piece.jacobian, hessian=piece.hessian, name=name)
    A = np.array([[2.0 * a * b, 1.0], [-1.0, 2.0 * a * b]]) / (a * a + b * b)
    closed = ClosedForm(epsilon=1, A=A, ambient_curvature=-1.0,
                        description="(1/(a^2+b^2)) [[2ab, 1], [-1, 2ab]]", jordan_tag='IV')
    return CatalogSurface(name, 'complex_circle', params, chart, closed, ("b^2 - a^2 = 1", "ab != 0"))


def complex_circle_from_a2(a2: float) -> CatalogSurface:
    """Complex circle with a = sqrt(a2) > 0, b = sqrt(a2 + 1)"""
    if a2 <= 0:
        raise ConstraintViolation(f"complex_circle: requires a^2 > 0 (got a^2={a2:g})")
    return complex_circle(math.sqrt(a2), math.sqrt(a2 + 1.0))


# ============================================
# B-scroll closed form (k = 1)
# ============================================

@dataclass(frozen=True)
class TrigCurve:
    """
    Curve in R^4 whose components are combinations of
    sin(w s), cos(w s), sinh(v s), cosh(v s)
    """
    coefficients: np.ndarray
    omega: float
    nu: float

    def derivative(self) -> 'TrigCurve':
        p, q, r, w = (self.coefficients[:, i] for i in range(4))
        coeffs = np.stack([-q * self.omega, p * self.omega, w * self.nu, r * self.nu], axis=1)
        return TrigCurve(coeffs, self.omega, self.nu)

    def __call__(self, s: float, order: int = 0) -> np.ndarray:
        curve = self
        for _ in range(order):
            curve = curve.derivative()
        basis = np.array([math.sin(self.omega * s), math.cos(self.omega * s),
                          math.sinh(self.nu * s), math.cosh(self.nu * s)])
        return curve.coefficients @ basis


def bscroll_closed_form(lam: float) -> Tuple[TrigCurve, TrigCurve]:
    """Null curve gamma and null field B of the k = 1 B-scroll with parameter lambda"""
    root = math.sqrt(1.0 + lam * lam)
    c, d = root + lam, root - lam
    rc, rd = math.sqrt(c), math.sqrt(d)
    total = c + d
    gamma = np.array([
        [rc * (total - 2.0), 2.0 * c, rd * (total + 2.0), 2.0 * d],
        [rc * total, 2.0 * c, rd * total, 2.0 * d],
        [-2.0 * rc, 2.0 * c, 2.0 * rd, 2.0 * d],
        [0.0, 2.0, 0.0, -2.0],
    ]) / (2.0 * total)
    B = np.array([
        [2.0 * rc, 2.0 - total, 2.0 * rd, 2.0 + total],
        [2.0 * rc, -total, 2.0 * rd, total],
        [2.0 * rc, 2.0, 2.0 * rd, 2.0],
        [2.0 * rd, 0.0, -2.0 * rc, 0.0],
    ]) / 4.0
    return TrigCurve(gamma, rd, rc), TrigCurve(B, rd, rc)


class _ScrollChart:
    """x(s, u) = gamma(s) + u B(s) from a pair of curves with derivatives"""

    def __init__(self, gamma: Callable[[float, int], np.ndarray], B: Callable[[float, int], np.ndarray]):
        self.gamma, self.B = gamma, B

    def point(self, p: np.ndarray) -> np.ndarray:
        s, u = p
        return self.gamma(s, 0) + u * self.B(s, 0)

    def jacobian(self, p: np.ndarray) -> np.ndarray:
        s, u = p
        return np.array([self.gamma(s, 1) + u * self.B(s, 1), self.B(s, 0)])

    def hessian(self, p: np.ndarray) -> np.ndarray:
        s, u = p
        d_ss = self.gamma(s, 2) + u * self.B(s, 2)
        d_su = self.B(s, 1)
        return np.array([[d_ss, d_su], [d_su, np.zeros(4)]])


def bscroll_shape(lam: float, k: float = 1.0) -> ClosedForm:
    """Coordinate shape matrix [[lam, 0], [k, lam]] of a B-scroll in S^3_1"""
    A = np.array([[lam, 0.0], [k, lam]])
    return ClosedForm(epsilon=1, A=A, ambient_curvature=1.0,
                      description="[[lambda, 0], [k(s), lambda]]", jordan_tag='II' if k else 'I')


def scroll_chart(gamma, B, name: str, domain: Tuple[Tuple[float, float], ...]) -> ImmersionChart:
    piece = _ScrollChart(gamma, B)
    return ImmersionChart(ambient=sphere(3, 1), map=piece.point, domain=domain,
                          jacobian=piece.jacobian, hessian=piece.hessian, name=name)


def bscroll_surface(lam: float) -> CatalogSurface:
    """B-scroll over the closed-form null curve (k = 1), chart (s, u)"""
    gamma, B = bscroll_closed_form(lam)
    name = f"B-scroll(lambda={lam:g}, k=1)"
    chart = scroll_chart(gamma, B, name, ((-1.0, 1.0), (-0.5, 0.5)))
    return CatalogSurface(name, 'bscroll', {'lambda': lam}, chart, bscroll_shape(lam))


# ============================================
# Duality
# ============================================

def dual(surface: CatalogSurface) -> CatalogSurface:
    """
    Metric-flip partner of a surface in S^{m+1}_t (or R^{m+1}_t).

    Flipping the flat metric turns S^{m+1}_t into H^{m+1}_{m+1-t}; coordinates are
    reversed so the timelike ones come first again. eps and f change sign, A is kept.
    """
    chart = surface.chart
    ambient = chart.ambient
    if ambient.curvature not in (0.0, 1.0):
        raise ConstraintViolation(f"dual: requires ambient curvature 1 or 0 (got {ambient.label})")

    def point(u):
        return chart.point(u)[::-1]

    def jacobian(u):
        return chart.first_derivatives(u)[:, ::-1]

    def hessian(u):
        return chart.second_derivatives(u)[:, :, ::-1]

    name = f"dual({surface.name})"
    dual_chart = ImmersionChart(ambient=ambient.dual(), map=point, domain=chart.domain,
                                jacobian=jacobian, hessian=hessian, policy=chart.policy, name=name)
    closed = surface.closed_form
    dual_closed = ClosedForm(epsilon=-closed.epsilon, A=closed.A, ambient_curvature=-closed.ambient_curvature,
                             description=closed.description, jordan_tag=closed.jordan_tag)
    return CatalogSurface(name, 'dual', {'of': surface.family, **surface.params}, dual_chart, dual_closed,
                          surface.constraints)


# ============================================
# Family registry
# ============================================

@dataclass(frozen=True)
class FamilySchema:
    builder: Callable[..., CatalogSurface]
    required: Tuple[str, ...]
    optional: Dict[str, float] = field(default_factory=dict)
    integers: Tuple[str, ...] = ()


FAMILIES: Dict[str, FamilySchema] = {
    'sphere': FamilySchema(pseudo_sphere_slice, ('m', 't', 'c'), integers=('m', 't')),
    'low_index_sphere': FamilySchema(low_index_sphere_slice, ('m', 't', 'c'), integers=('m', 't')),
    'flat_slice': FamilySchema(flat_slice, ('m', 't'), {'a': 1.0}, integers=('m', 't')),
    'hyperbolic_slice': FamilySchema(hyperbolic_slice, ('m', 't', 'c'), integers=('m', 't')),
    'sphere_product': FamilySchema(sphere_product, ('m', 't', 'k', 'l', 'c'), integers=('m', 't', 'k', 'l')),
    'sphere_hyperbolic_product': FamilySchema(sphere_hyperbolic_product, ('m', 't', 'k', 'l', 'c'),
                                              integers=('m', 't', 'k', 'l')),
    'flat_sphere': FamilySchema(flat_pseudo_sphere, ('m', 't', 'c'), integers=('m', 't')),
    'flat_hyperbolic': FamilySchema(flat_pseudo_hyperbolic, ('m', 't', 'c'), integers=('m', 't')),
    'complex_circle': FamilySchema(complex_circle, ('a', 'b')),
    'complex_circle_a2': FamilySchema(complex_circle_from_a2, ('a2',)),
    'bscroll': FamilySchema(bscroll_surface, ('lambda',)),
}


def table_entry(family: str, params: Dict[str, float]) -> CatalogSurface:
    """Build a catalog surface from a family name and a parameter mapping"""
    if family not in FAMILIES:
        raise ValueError(f"Unknown family '{family}'. Known: {', '.join(sorted(FAMILIES))}")
    schema = FAMILIES[family]
    unknown = set(params) - set(schema.required) - set(schema.optional)
    if unknown:
        raise ValueError(f"{family}: unknown parameters {sorted(unknown)}")
    missing = [p for p in schema.required if p not in params]
    if missing:
        raise ValueError(f"{family}: missing parameters {missing}")
    values = dict(schema.optional)
    values.update(params)
    args = []
    for name in schema.required + tuple(schema.optional):
        value = values[name]
        if name in schema.integers:
            if float(value) != int(value):
                raise ValueError(f"{family}: parameter {name} must be an integer, got {value}")
            value = int(value)
        else:
            value = float(value)
        args.append(value)
    surface = schema.builder(*args)
    logger.debug(f"Built catalog surface {surface.name}")
    return surface


def oracle_sweep(surface: CatalogSurface, count: int = 25, seed: Optional[int] = None,
                 tol: float = 1e-6) -> List[dict]:
    """Compare numeric shape reports with the closed form at random interior points"""
    rng = np.random.default_rng(lab_config.seed if seed is None else seed)
    results = []
    for u in surface.chart.sample_points(count, rng):
        report = shape_report(surface.chart, u)
        comparison = surface.compare(report, tol)
        comparison['point'] = [float(v) for v in u]
        results.append(comparison)
    return results
