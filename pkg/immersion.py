"""
Extrinsic geometry of hypersurface patches
Induced metric, unit normal, second fundamental form, shape operator and field derivatives
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import null_space

from config import lab_config
from pgeom_core import (DimensionMismatch, Frame, JordanType, NormalNotFound,
                        classify_operator, orthonormalize, pseudo_dot)
from space_form import SpaceForm, contains

logger = logging.getLogger(__name__)

ANALYTIC = 'analytic'
FINITE_DIFFERENCE = 'finite_difference'


# ============================================
# Charts
# ============================================

@dataclass(frozen=True)
class DerivativePolicy:
    """How chart derivatives are obtained"""
    kind: str = ANALYTIC
    step: float = field(default_factory=lambda: lab_config.fd_step)
    hessian_step: float = field(default_factory=lambda: lab_config.fd_hessian_step)

    def __post_init__(self):
        if self.kind not in (ANALYTIC, FINITE_DIFFERENCE):
            raise ValueError(f"Unknown derivative policy: {self.kind}")
        if self.step <= 0 or self.hessian_step <= 0:
            raise ValueError("finite-difference steps must be positive")

    @classmethod
    def finite_difference(cls, step: Optional[float] = None,
                          hessian_step: Optional[float] = None) -> 'DerivativePolicy':
        return cls(kind=FINITE_DIFFERENCE,
                   step=lab_config.fd_step if step is None else step,
                   hessian_step=lab_config.fd_hessian_step if hessian_step is None else hessian_step)


@dataclass(frozen=True)
class ImmersionChart:
    """
    Parametrized hypersurface patch u -> x(u) in the flat model of `ambient`

    jacobian(u) returns the (m, n) array of rows d_i x,
    hessian(u) the (m, m, n) array of d_i d_j x.
    """
    ambient: SpaceForm
    map: Callable[[np.ndarray], np.ndarray]
    domain: Tuple[Tuple[float, float], ...]
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    hessian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    policy: DerivativePolicy = field(default_factory=DerivativePolicy)
    name: str = 'chart'

    def __post_init__(self):
        if len(self.domain) != self.m:
            raise DimensionMismatch(
                f"{self.name}: domain has {len(self.domain)} coordinates, hypersurface of {self.ambient.label} needs {self.m}"
            )
        for lo, hi in self.domain:
            if not lo < hi:
                raise ValueError(f"{self.name}: empty domain interval ({lo}, {hi})")

    @property
    def m(self) -> int:
        return self.ambient.dim - 1

    @property
    def uses_analytic(self) -> bool:
        return self.policy.kind == ANALYTIC and self.jacobian is not None and self.hessian is not None

    def with_finite_differences(self, step: Optional[float] = None,
                                hessian_step: Optional[float] = None) -> 'ImmersionChart':
        return replace(self, policy=DerivativePolicy.finite_difference(step, hessian_step))

    def point(self, u) -> np.ndarray:
        return np.asarray(self.map(np.asarray(u, dtype=float)), dtype=float)

    def first_derivatives(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.uses_analytic:
            return np.asarray(self.jacobian(u), dtype=float)
        h = self.policy.step
        rows = []
        for i in range(self.m):
            du = np.zeros(self.m)
            du[i] = h
            rows.append((self.point(u + du) - self.point(u - du)) / (2.0 * h))
        return np.array(rows)

    def second_derivatives(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.uses_analytic:
            return np.asarray(self.hessian(u), dtype=float)
        h = self.policy.hessian_step
        m = self.m
        center = self.point(u)
        out = np.zeros((m, m, center.size))
        eye = np.eye(m) * h
        for i in range(m):
            out[i, i] = (self.point(u + eye[i]) - 2.0 * center + self.point(u - eye[i])) / h ** 2
            for j in range(i + 1, m):
                mixed = (self.point(u + eye[i] + eye[j]) - self.point(u + eye[i] - eye[j])
                         - self.point(u - eye[i] + eye[j]) + self.point(u - eye[i] - eye[j])) / (4.0 * h ** 2)
                out[i, j] = out[j, i] = mixed
        return out

    def inside(self, u) -> bool:
        return all(lo <= ui <= hi for ui, (lo, hi) in zip(np.asarray(u, dtype=float), self.domain))

    def center(self) -> np.ndarray:
        return np.array([(lo + hi) / 2.0 for lo, hi in self.domain])

    def grid(self, count: int, margin: float = 0.05) -> List[np.ndarray]:
        """count**m points on a regular grid shrunk by `margin` of each side"""
        axes = [np.linspace(lo + margin * (hi - lo), hi - margin * (hi - lo), count) for lo, hi in self.domain]
        mesh = np.meshgrid(*axes, indexing='ij')
        return [np.array(p) for p in zip(*(axis.ravel() for axis in mesh))]

    def sample_points(self, count: int, rng: np.random.Generator, margin: float = 0.05) -> List[np.ndarray]:
        lows = np.array([lo + margin * (hi - lo) for lo, hi in self.domain])
        highs = np.array([hi - margin * (hi - lo) for lo, hi in self.domain])
        return [rng.uniform(lows, highs) for _ in range(count)]

    def membership_residual(self, u) -> float:
        """|<x,x> - 1/c| at u, 0 for flat ambients"""
        if self.ambient.curvature == 0:
            return 0.0
        x = self.point(u)
        return abs(pseudo_dot(x, x, self.ambient.flat_model) - self.ambient.level)


# ============================================
# Pointwise extrinsic data
# ============================================

@dataclass(frozen=True)
class FundamentalData:
    """First and second fundamental forms at a chart point"""
    point: np.ndarray
    position: np.ndarray
    jacobian: np.ndarray
    hessian: np.ndarray
    g: np.ndarray
    h: np.ndarray
    frame: Frame
    normal: np.ndarray
    epsilon: int
    orientation: str

    def __iter__(self) -> Iterator:
        return iter((self.g, self.h, self.frame, self.normal, self.epsilon))


@dataclass(frozen=True)
class ShapeReport:
    """Shape operator and invariants at a chart point"""
    point: np.ndarray
    frame: Frame
    epsilon: int
    normal: np.ndarray
    A_matrix: np.ndarray
    A_coord: np.ndarray
    g: np.ndarray
    f: float
    trA: float
    trA2: float
    jordan: Optional[JordanType]
    gauss_curvature: Optional[float]
    self_adjoint_residual: float
    orientation: str

    def to_dict(self) -> dict:
        return {
            'point': [float(v) for v in self.point],
            'epsilon': self.epsilon,
            'frame_signs': list(self.frame.signs),
            'normal': [float(v) for v in self.normal],
            'A_matrix': np.asarray(self.A_matrix).tolist(),
            'f': self.f,
            'trA': self.trA,
            'trA2': self.trA2,
            'jordan': self.jordan.to_dict() if self.jordan else None,
            'gauss_curvature': self.gauss_curvature,
            'self_adjoint_residual': self.self_adjoint_residual,
            'orientation': self.orientation,
        }


def _unit_normal(rows: np.ndarray, sf: SpaceForm, tol: float) -> Tuple[np.ndarray, int]:
    model = sf.flat_model
    scaled = rows / np.linalg.norm(rows, axis=1, keepdims=True)
    complement = null_space(scaled * model.signs)
    if complement.shape[1] != 1:
        raise NormalNotFound(
            f"orthogonal complement has dimension {complement.shape[1]}, expected 1"
        )
    eta = complement[:, 0]
    norm2 = pseudo_dot(eta, eta, model)
    if abs(norm2) <= tol:
        raise NormalNotFound(f"normal direction is null (<eta,eta> = {norm2:.3e}); degenerate hypersurface")
    return eta / np.sqrt(abs(norm2)), int(np.sign(norm2))


def fundamental_data(chart: ImmersionChart, u, tol: Optional[float] = None,
                     orientation: int = 1, reference_normal=None) -> FundamentalData:
    """
    g_ij = <d_i x, d_j x>, unit normal eta and h_ij = <d_i d_j x, eta>.

    The normal is the one-dimensional complement of span{d_i x} (and x when c != 0).
    Orientation: with a reference normal, <eta, ref> has the sign of eps; otherwise
    the first non-negligible component of eta is positive. `orientation=-1` flips it.
    """
    tol = lab_config.tol if tol is None else tol
    u = np.asarray(u, dtype=float)
    if u.shape != (chart.m,):
        raise DimensionMismatch(f"{chart.name}: point has shape {u.shape}, chart dimension is {chart.m}")
    if not chart.inside(u):
        raise ValueError(f"{chart.name}: point {u.tolist()} lies outside the chart domain")

    sf = chart.ambient
    model = sf.flat_model
    position = chart.point(u)
    jac = chart.first_derivatives(u)
    hess = chart.second_derivatives(u)

    frame = orthonormalize(jac, model, tol)
    g = model.gram(jac)
    g = 0.5 * (g + g.T)

    rows = jac if sf.curvature == 0 else np.vstack([jac, position])
    eta, epsilon = _unit_normal(rows, sf, tol)

    if reference_normal is not None:
        rule = 'reference'
        if pseudo_dot(eta, np.asarray(reference_normal, dtype=float), model) * epsilon < 0:
            eta = -eta
    else:
        rule = 'first-component-positive'
        pivot = np.flatnonzero(np.abs(eta) > tol * np.max(np.abs(eta)))[0]
        if eta[pivot] < 0:
            eta = -eta
    if orientation < 0:
        eta = -eta
        rule += ',flipped'

    h = np.einsum('ija,a,a->ij', hess, model.signs, eta)
    h = 0.5 * (h + h.T)
    return FundamentalData(point=u, position=position, jacobian=jac, hessian=hess, g=g, h=h,
                           frame=frame, normal=eta, epsilon=epsilon, orientation=rule)


def chart_normal(chart: ImmersionChart, tol: Optional[float] = None, orientation: int = 1) -> np.ndarray:
    """Unit normal at the chart centre; pass as reference_normal to orient a whole chart consistently"""
    return fundamental_data(chart, chart.center(), tol, orientation).normal


def shape_from_data(data: FundamentalData, ambient_curvature: float,
                    jordan_tol: Optional[float] = None) -> ShapeReport:
    """Shape operator A = g^-1 h and its frame matrix P^-1 A P from fundamental data"""
    jordan_tol = lab_config.tol if jordan_tol is None else jordan_tol
    m = data.g.shape[0]
    A_coord = np.linalg.solve(data.g, data.h)
    P = np.asarray(data.frame.transform)
    A_frame = np.linalg.solve(P, A_coord @ P)

    trA = float(np.trace(A_coord))
    trA2 = float(np.trace(A_coord @ A_coord))
    f = data.epsilon * trA / m

    # <A e_j, e_i> = eps_i (A_frame)_ij must be symmetric
    signed = np.diag(data.frame.signs) @ A_frame
    self_adjoint = float(np.max(np.abs(signed - signed.T)))

    jordan = classify_operator(A_frame, jordan_tol) if m in (2, 3) else None
    # Gauss equation: K = c + eps det A
    gauss = float(ambient_curvature + data.epsilon * np.linalg.det(A_coord)) if m == 2 else None
    return ShapeReport(point=data.point, frame=data.frame, epsilon=data.epsilon, normal=data.normal,
                       A_matrix=A_frame, A_coord=A_coord, g=data.g, f=f, trA=trA, trA2=trA2,
                       jordan=jordan, gauss_curvature=gauss, self_adjoint_residual=self_adjoint,
                       orientation=data.orientation)


def shape_report(chart: ImmersionChart, u, tol: Optional[float] = None, orientation: int = 1,
                 jordan_tol: Optional[float] = None, reference_normal=None) -> ShapeReport:
    """
    ShapeReport at u.

    trA and trA2 come from the coordinate matrix g^-1 h; the orthonormal-frame
    matrix is used for Jordan classification and display.
    """
    data = fundamental_data(chart, u, tol, orientation, reference_normal)
    return shape_from_data(data, chart.ambient.curvature, jordan_tol)


# ============================================
# Connection and field derivatives
# ============================================

def christoffel(chart: ImmersionChart, u, tol: Optional[float] = None) -> np.ndarray:
    """Gamma[k, i, j] = g^{kl} <d_i d_j x, d_l x> of the induced metric"""
    data = fundamental_data(chart, u, tol)
    signs = chart.ambient.flat_model.signs
    lowered = np.einsum('ija,a,la->ijl', data.hessian, signs, data.jacobian)
    return np.einsum('kl,ijl->kij', np.linalg.inv(data.g), lowered)


def _stencil(u: np.ndarray, h: float) -> List[Tuple[np.ndarray, np.ndarray]]:
    eye = np.eye(u.size) * h
    return [(u + eye[i], u - eye[i]) for i in range(u.size)]


def field_derivatives(fn: Callable[[np.ndarray], float], u, h: float) -> Tuple[float, np.ndarray, np.ndarray]:
    """Value, gradient and Hessian of a scalar field by central differences with step h"""
    u = np.asarray(u, dtype=float)
    m = u.size
    eye = np.eye(m) * h
    center = fn(u)
    grad = np.zeros(m)
    hess = np.zeros((m, m))
    plus = [fn(u + eye[i]) for i in range(m)]
    minus = [fn(u - eye[i]) for i in range(m)]
    for i in range(m):
        grad[i] = (plus[i] - minus[i]) / (2.0 * h)
        hess[i, i] = (plus[i] - 2.0 * center + minus[i]) / h ** 2
        for j in range(i + 1, m):
            hess[i, j] = hess[j, i] = (fn(u + eye[i] + eye[j]) - fn(u + eye[i] - eye[j])
                                       - fn(u - eye[i] + eye[j]) + fn(u - eye[i] - eye[j])) / (4.0 * h ** 2)
    return center, grad, hess


def gradient_and_laplacian(chart: ImmersionChart, fn: Callable[[np.ndarray], float], u,
                           h_outer: Optional[float] = None,
                           tol: Optional[float] = None) -> Tuple[float, np.ndarray, float]:
    """
    Coordinate gradient vector g^{ij} d_j F and Laplacian
    Delta F = -g^{ij}(d_i d_j F - Gamma^k_ij d_k F) of a scalar field F on the chart.
    """
    h_outer = lab_config.field_step if h_outer is None else h_outer
    u = np.asarray(u, dtype=float)
    data = fundamental_data(chart, u, tol)
    g_inv = np.linalg.inv(data.g)
    gamma = christoffel(chart, u, tol)
    value, grad, hess = field_derivatives(fn, u, h_outer)
    laplacian = -float(np.einsum('ij,ij->', g_inv, hess - np.einsum('kij,k->ij', gamma, grad)))
    return value, g_inv @ grad, laplacian


def codazzi_trace_residual(chart: ImmersionChart, u, h_outer: Optional[float] = None,
                           tol: Optional[float] = None) -> np.ndarray:
    """
    trace(nabla A) - m eps grad f in coordinate components.

    Neighbouring shape operators are computed with normals aligned to the
    normal at u, so the finite differences never cross an orientation flip.
    """
    h_outer = lab_config.field_step if h_outer is None else h_outer
    u = np.asarray(u, dtype=float)
    base = fundamental_data(chart, u, tol)
    report = shape_from_data(base, chart.ambient.curvature)
    m = chart.m
    g_inv = np.linalg.inv(base.g)
    gamma = christoffel(chart, u, tol)

    dA = np.zeros((m, m, m))
    df = np.zeros(m)
    for i, (up, down) in enumerate(_stencil(u, h_outer)):
        rep_up = shape_report(chart, up, tol, reference_normal=base.normal)
        rep_down = shape_report(chart, down, tol, reference_normal=base.normal)
        dA[i] = (rep_up.A_coord - rep_down.A_coord) / (2.0 * h_outer)
        df[i] = (rep_up.f - rep_down.f) / (2.0 * h_outer)

    A = report.A_coord
    # (nabla_i A)^k_j = d_i A^k_j + Gamma^k_il A^l_j - A^k_l Gamma^l_ij
    nabla = dA + np.einsum('kil,lj->ikj', gamma, A) - np.einsum('kl,lij->ikj', A, gamma)
    trace_nabla = np.einsum('ij,ikj->k', g_inv, nabla)
    return trace_nabla - m * report.epsilon * (g_inv @ df)


def check_membership(chart: ImmersionChart, points: Sequence, tol: float) -> bool:
    """Every sampled chart point lies on the ambient model within tol"""
    return all(contains(chart.ambient, chart.point(p), tol) for p in points)
