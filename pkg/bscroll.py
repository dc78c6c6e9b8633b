"""
B-scrolls over null curves in S^3_1
Cartan-frame integration, frame-relation checks, surface sampling and harmonicity checks
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from catalog import bscroll_closed_form, scroll_chart
from harmonicity import HarmonicityInput, HarmonicityReport, classify
from immersion import ImmersionChart, shape_report
from pgeom_core import GeometryError, Signature

logger = logging.getLogger(__name__)

MINKOWSKI_4 = Signature(4, 1)
E = np.diag([-1.0, 1.0, 1.0, 1.0])
T = np.array([[0.0, -1.0, 0.0, 0.0],
              [-1.0, 0.0, 0.0, 0.0],
              [0.0, 0.0, 1.0, 0.0],
              [0.0, 0.0, 0.0, 1.0]])
# columns A(0), B(0), C(0), gamma(0)
X0 = np.array([[1.0, 1.0, 0.0, 1.0],
               [1.0, 0.0, 0.0, 1.0],
               [0.0, 1.0, 0.0, 1.0],
               [0.0, 0.0, 1.0, 0.0]])
COLUMNS = ('A', 'B', 'C', 'gamma')


class KSpecError(ValueError):
    """Malformed k(s) descriptor"""


# ============================================
# k(s) descriptors
# ============================================

@dataclass(frozen=True)
class KSpec:
    """k(s) from 'const:v', 'poly:a0,a1,...' or 'sin:amp,freq,phase'"""
    kind: str
    params: Tuple[float, ...]
    text: str = ''

    def __call__(self, s: float) -> float:
        if self.kind == 'const':
            return self.params[0]
        if self.kind == 'poly':
            return float(np.polynomial.polynomial.polyval(s, self.params))
        amp, freq, phase = self.params
        return amp * math.sin(freq * s + phase)

    def derivative(self, s: float) -> float:
        if self.kind == 'const':
            return 0.0
        if self.kind == 'poly':
            coeffs = np.polynomial.polynomial.polyder(self.params) if len(self.params) > 1 else [0.0]
            return float(np.polynomial.polynomial.polyval(s, coeffs))
        amp, freq, phase = self.params
        return amp * freq * math.cos(freq * s + phase)

    @property
    def identically_zero(self) -> bool:
        if self.kind == 'sin':
            return self.params[0] == 0 or self.params[1] == 0 and math.sin(self.params[2]) == 0
        return all(p == 0 for p in self.params)

    def __str__(self) -> str:
        return self.text or f"{self.kind}:{','.join(f'{p:g}' for p in self.params)}"


def parse_k_spec(text: str) -> KSpec:
    """Parse a k(s) descriptor"""
    if not isinstance(text, str) or ':' not in text:
        raise KSpecError(f"k-spec must look like 'kind:values', got {text!r}")
    kind, _, body = text.partition(':')
    kind = kind.strip().lower()
    try:
        values = tuple(float(v) for v in body.split(',') if v.strip())
    except ValueError as exc:
        raise KSpecError(f"k-spec {text!r} has a non-numeric value") from exc
    expected = {'const': (1, 1), 'poly': (1, None), 'sin': (3, 3)}
    if kind not in expected:
        raise KSpecError(f"Unknown k-spec kind {kind!r}; use const, poly or sin")
    low, high = expected[kind]
    if len(values) < low or (high is not None and len(values) > high):
        raise KSpecError(f"k-spec {kind!r} takes {low if low == high else f'at least {low}'} values, got {len(values)}")
    if not all(math.isfinite(v) for v in values):
        raise KSpecError(f"k-spec {text!r} contains non-finite values")
    return KSpec(kind, values, text.strip())


# ============================================
# Cartan system
# ============================================

@dataclass(frozen=True)
class CartanSystem:
    """X'(s) = X(s) M(s) with X(0)^t E X(0) = T"""
    lam: float
    k_spec: KSpec
    E: np.ndarray = field(default_factory=lambda: E.copy())
    T: np.ndarray = field(default_factory=lambda: T.copy())
    X0: np.ndarray = field(default_factory=lambda: X0.copy())

    def M(self, s: float) -> np.ndarray:
        k = self.k_spec(s)
        lam = self.lam
        return np.array([[0.0, 0.0, -lam, 1.0],
                         [0.0, 0.0, -k, 0.0],
                         [-k, -lam, 0.0, 0.0],
                         [0.0, 1.0, 0.0, 0.0]])

    def conservation_residual(self, s: float) -> float:
        """max |M^t T + T M| at s"""
        M = self.M(s)
        return float(np.max(np.abs(M.T @ self.T + self.T @ M)))

    def initial_residual(self) -> float:
        return float(np.max(np.abs(self.X0.T @ self.E @ self.X0 - self.T)))


def make_system(lam: float, k_spec: Union[str, KSpec]) -> CartanSystem:
    """Cartan system for parameter lambda and curvature function k"""
    spec = parse_k_spec(k_spec) if isinstance(k_spec, str) else k_spec
    system = CartanSystem(float(lam), spec)
    if system.initial_residual() != 0.0:
        raise GeometryError("initial frame does not satisfy X0^t E X0 = T")
    scale = max(1.0, abs(lam), abs(spec(0.0)))
    if system.conservation_residual(0.0) > 1e-14 * scale:
        raise GeometryError("M^t T + T M does not vanish; pairing would not be conserved")
    return system


# ============================================
# Integration
# ============================================

def _rk4_step(system: CartanSystem, s: float, X: np.ndarray, h: float) -> np.ndarray:
    k1 = X @ system.M(s)
    k2 = (X + 0.5 * h * k1) @ system.M(s + 0.5 * h)
    k3 = (X + 0.5 * h * k2) @ system.M(s + 0.5 * h)
    k4 = (X + h * k3) @ system.M(s + h)
    return X + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def pairing_drift(X: np.ndarray) -> Tuple[float, float]:
    """(normalized, absolute) max |X^t E X - T|; normalized by max(1, |X|_max^2)"""
    absolute = float(np.max(np.abs(X.T @ E @ X - T)))
    return absolute / max(1.0, float(np.max(np.abs(X))) ** 2), absolute


@dataclass(frozen=True)
class CartanTrajectory:
    """Integrated frame samples; columns A, B, C, gamma"""
    system: CartanSystem
    s: np.ndarray
    X: np.ndarray
    step: float
    max_pairing_drift: float
    max_absolute_drift: float

    def column(self, name: str) -> np.ndarray:
        return self.X[:, :, COLUMNS.index(name)]

    @property
    def s_range(self) -> Tuple[float, float]:
        return float(self.s[0]), float(self.s[-1])

    def frame_at(self, s: float) -> np.ndarray:
        """Frame at an arbitrary s: one RK4 step from the nearest grid sample"""
        lo, hi = self.s_range
        if not lo - 1e-12 <= s <= hi + 1e-12:
            raise ValueError(f"s={s} outside the integrated range [{lo}, {hi}]")
        idx = int(np.argmin(np.abs(self.s - s)))
        h = s - float(self.s[idx])
        if h == 0.0:
            return self.X[idx].copy()
        return _rk4_step(self.system, float(self.s[idx]), self.X[idx], h)

    def frame_relations(self, i: int) -> dict:
        """Pairings of the Cartan frame at sample i"""
        A, B, C, g = self.X[i].T

        def dot(x, y):
            return float(np.dot(x * MINKOWSKI_4.signs, y))

        return {'AA': dot(A, A), 'BB': dot(B, B), 'AB': dot(A, B), 'AC': dot(A, C),
                'BC': dot(B, C), 'CC': dot(C, C), 'gg': dot(g, g)}


def integrate(system: CartanSystem, s_max: float, step: float,
              both_directions: bool = False) -> CartanTrajectory:
    """
    Classical fixed-step RK4 on [0, s_max] (or [-s_max, s_max]).

    The step is shrunk so that an integer number of steps reaches s_max.
    """
    if step <= 0 or s_max <= 0:
        raise ValueError("step and s_max must be positive")
    n = max(1, int(round(s_max / step)))
    h = s_max / n

    def sweep(direction: float) -> Tuple[List[float], List[np.ndarray]]:
        s_values, frames = [0.0], [system.X0.astype(float)]
        X = frames[0]
        for i in range(n):
            s = direction * i * h
            X = _rk4_step(system, s, X, direction * h)
            s_values.append(direction * (i + 1) * h)
            frames.append(X)
        return s_values, frames

    s_fwd, X_fwd = sweep(1.0)
    if both_directions:
        s_bwd, X_bwd = sweep(-1.0)
        s_values = s_bwd[::-1] + s_fwd[1:]
        frames = X_bwd[::-1] + X_fwd[1:]
    else:
        s_values, frames = s_fwd, X_fwd

    X = np.array(frames)
    drifts = [pairing_drift(frame) for frame in X]
    normalized = max(d[0] for d in drifts)
    absolute = max(d[1] for d in drifts)
    logger.debug(f"Integrated lambda={system.lam} k={system.k_spec} over {len(s_values)} samples, "
                 f"drift {normalized:.2e} (absolute {absolute:.2e})")
    return CartanTrajectory(system, np.array(s_values), X, h, normalized, absolute)


# ============================================
# Surface
# ============================================

@dataclass(frozen=True)
class SurfaceSample:
    s: float
    u: float
    x: np.ndarray
    membership_residual: float


def surface_samples(traj: CartanTrajectory, u_values: Sequence[float], stride: int = 1) -> List[SurfaceSample]:
    """
    x(s,u) = gamma(s) + u B(s) on the trajectory grid (every `stride`-th s).

    membership_residual is |<x,x> - 1| normalized like the pairing drift.
    """
    samples = []
    gamma = traj.column('gamma')
    B = traj.column('B')
    for i in range(0, len(traj.s), stride):
        for u in u_values:
            x = gamma[i] + u * B[i]
            residual = abs(MINKOWSKI_4.gram(x)[0, 0] - 1.0) / max(1.0, float(np.max(np.abs(x))) ** 2)
            samples.append(SurfaceSample(float(traj.s[i]), float(u), x, residual))
    return samples


def trajectory_chart(traj: CartanTrajectory, u_half: float = 0.5, s_margin: Optional[float] = None) -> ImmersionChart:
    """
    Chart (s, u) -> gamma(s) + u B(s) over an integrated trajectory.

    Derivatives come from the frame equations: gamma' = A, gamma'' = -k C,
    B' = gamma - lam C, B'' = (lam^2 + 1) A + lam k B.
    """
    system = traj.system
    lam = system.lam
    lo, hi = traj.s_range
    margin = 4.0 * traj.step if s_margin is None else s_margin

    def gamma(s, order):
        A, B, C, g = traj.frame_at(s).T
        if order == 0:
            return g
        if order == 1:
            return A
        return -system.k_spec(s) * C

    def b_field(s, order):
        A, B, C, g = traj.frame_at(s).T
        if order == 0:
            return B
        if order == 1:
            return g - lam * C
        return (lam * lam + 1.0) * A + lam * system.k_spec(s) * B

    name = f"B-scroll(lambda={lam:g}, k={system.k_spec})"
    return scroll_chart(gamma, b_field, name, ((lo + margin, hi - margin), (-u_half, u_half)))


# ============================================
# Checks
# ============================================

@dataclass(frozen=True)
class KZeros:
    definitive: Tuple[float, ...]
    suspected: Tuple[float, ...]


def locate_k_zeros(k_spec: KSpec, s_grid: Sequence[float], zero_tol: float = 1e-12,
                   suspect_tol: float = 1e-6) -> KZeros:
    """
    Zeros of k on a sample grid: sign changes are refined with brentq; grid
    values below zero_tol count when k' is non-zero there; small local minima
    of |k| without a sign change are only suspected.
    """
    s_grid = np.asarray(s_grid, dtype=float)
    values = np.array([k_spec(s) for s in s_grid])
    definitive: List[float] = []
    suspected: List[float] = []

    for i in range(len(s_grid) - 1):
        if values[i] * values[i + 1] < 0:
            definitive.append(float(brentq(k_spec, s_grid[i], s_grid[i + 1], xtol=1e-14)))

    for i, (s, v) in enumerate(zip(s_grid, values)):
        if abs(v) > zero_tol:
            continue
        if abs(k_spec.derivative(s)) > math.sqrt(zero_tol):
            definitive.append(float(s))
        else:
            suspected.append(float(s))

    magnitude = np.abs(values)
    for i in range(1, len(s_grid) - 1):
        if zero_tol < magnitude[i] <= suspect_tol and magnitude[i] <= magnitude[i - 1] \
                and magnitude[i] <= magnitude[i + 1] and values[i - 1] * values[i + 1] > 0:
            suspected.append(float(s_grid[i]))

    def unique(items: List[float]) -> Tuple[float, ...]:
        out: List[float] = []
        for s in sorted(items):
            if not out or abs(s - out[-1]) > 1e-9:
                out.append(s)
        return tuple(out)

    zeros = KZeros(unique(definitive), unique(suspected))
    if zeros.suspected:
        logger.info(f"k={k_spec}: suspected tangential zeros at {list(zeros.suspected)}")
    return zeros


@dataclass(frozen=True)
class BScrollReport:
    lam: float
    k_spec: str
    r: int
    trA2: float
    f: float
    epsilon: int
    gauss_curvature: float
    harmonicity: HarmonicityReport
    isoparametric: Optional[bool]
    k_zeros: KZeros
    max_pairing_drift: float
    null_curve_residual: float
    ode_identity_residual: float
    numeric_trA2_error: float
    jordan_tags: Tuple[str, ...]
    closed_form_mismatch: Optional[float]
    needs_review: bool

    def to_dict(self) -> dict:
        return {
            'lambda': self.lam,
            'k_spec': self.k_spec,
            'r': self.r,
            'trA2': self.trA2,
            'f': self.f,
            'epsilon': self.epsilon,
            'gauss_curvature': self.gauss_curvature,
            'harmonicity': self.harmonicity.to_dict(),
            'isoparametric': self.isoparametric,
            'k_zeros': list(self.k_zeros.definitive),
            'k_suspected_zeros': list(self.k_zeros.suspected),
            'max_pairing_drift': self.max_pairing_drift,
            'null_curve_residual': self.null_curve_residual,
            'ode_identity_residual': self.ode_identity_residual,
            'numeric_trA2_error': self.numeric_trA2_error,
            'jordan_tags': list(self.jordan_tags),
            'closed_form_mismatch': self.closed_form_mismatch,
            'needs_review': self.needs_review,
        }


def _normalized(value: np.ndarray, scale: float) -> float:
    return float(np.max(np.abs(value))) / max(1.0, scale)


def null_curve_residual(traj: CartanTrajectory) -> float:
    """max |<gamma', gamma'>| with gamma' from central differences of the sampled curve"""
    gamma = traj.column('gamma')
    h = traj.step
    worst = 0.0
    for i in range(1, len(traj.s) - 1):
        velocity = (gamma[i + 1] - gamma[i - 1]) / (2.0 * h)
        worst = max(worst, _normalized(MINKOWSKI_4.gram(velocity), float(np.max(np.abs(velocity))) ** 2))
    return worst


def ode_identity_residual(traj: CartanTrajectory) -> float:
    """max |C' + lam A + k B| with C' from central differences"""
    A, B, C = traj.column('A'), traj.column('B'), traj.column('C')
    h = traj.step
    system = traj.system
    worst = 0.0
    for i in range(1, len(traj.s) - 1):
        derivative = (C[i + 1] - C[i - 1]) / (2.0 * h)
        residual = derivative + system.lam * A[i] + system.k_spec(traj.s[i]) * B[i]
        worst = max(worst, _normalized(residual, float(np.max(np.abs(traj.X[i])))))
    return worst


def closed_form_mismatch(traj: CartanTrajectory, s_limit: float = 3.0) -> Optional[float]:
    """Largest normalized gap to the k = 1 closed-form gamma and B on [0, s_limit]"""
    spec = traj.system.k_spec
    if not (spec.kind == 'const' and spec.params[0] == 1.0):
        return None
    gamma_cf, b_cf = bscroll_closed_form(traj.system.lam)
    worst = 0.0
    for i, s in enumerate(traj.s):
        if s < 0 or s > s_limit:
            continue
        frame = traj.X[i]
        scale = float(np.max(np.abs(frame)))
        worst = max(worst, _normalized(frame[:, 3] - gamma_cf(s), scale),
                    _normalized(frame[:, 1] - b_cf(s), scale))
    return worst


def bscroll_checks(traj: CartanTrajectory, system: CartanSystem, r: int,
                   tol: float = 1e-6, samples: int = 5) -> BScrollReport:
    """
    Invariants and verdict of the B-scroll: trA2 = 2 lam^2, f = lam, eps = 1,
    K = lam^2 + 1, harmonicity from the closed invariants, isoparametric flag
    from the zeros of k, plus numeric cross-checks on the trajectory chart.
    """
    lam = system.lam
    closed_trA2 = 2.0 * lam * lam
    inp = HarmonicityInput(m=2, c=1.0, epsilon=1, alpha=lam, trA2=closed_trA2, r=r)
    harmonicity = classify(inp, tol)

    if system.k_spec.identically_zero:
        zeros = KZeros((), ())
        isoparametric: Optional[bool] = True
    else:
        zeros = locate_k_zeros(system.k_spec, traj.s)
        if zeros.definitive:
            isoparametric = False
        elif zeros.suspected:
            isoparametric = None
        else:
            isoparametric = True

    chart = trajectory_chart(traj)
    (s_lo, s_hi), _ = chart.domain
    s_hi = min(s_hi, s_lo + 3.0)
    trA2_error = 0.0
    tags = set()
    for s in np.linspace(s_lo, s_hi, samples):
        for u in (-0.25, 0.0, 0.25):
            report = shape_report(chart, np.array([s, u]), jordan_tol=tol)
            trA2_error = max(trA2_error, abs(report.trA2 - closed_trA2))
            if report.jordan is not None:
                tags.add(report.jordan.tag)

    mismatch = closed_form_mismatch(traj)
    review = mismatch is not None and mismatch > 1e-5
    if review:
        logger.warning(f"Closed-form gamma/B differ from the integrated frame by {mismatch:.2e}; flagged for review")

    return BScrollReport(
        lam=lam, k_spec=str(system.k_spec), r=r, trA2=closed_trA2, f=lam, epsilon=1,
        gauss_curvature=lam * lam + 1.0, harmonicity=harmonicity, isoparametric=isoparametric,
        k_zeros=zeros, max_pairing_drift=traj.max_pairing_drift,
        null_curve_residual=null_curve_residual(traj), ode_identity_residual=ode_identity_residual(traj),
        numeric_trA2_error=trA2_error, jordan_tags=tuple(sorted(tags)),
        closed_form_mismatch=mismatch, needs_review=review,
    )


def drift_ratios(lam: float, k_spec: Union[str, KSpec], s_max: float, steps: Sequence[float]) -> List[float]:
    """Successive drift ratios under step refinement"""
    system = make_system(lam, k_spec)
    drifts = [integrate(system, s_max, h).max_pairing_drift for h in steps]
    return [drifts[i] / drifts[i + 1] for i in range(len(drifts) - 1)]
