"""
Signed linear algebra over pseudo-Euclidean spaces
Inner products, Gram-matrix orthonormalization and Jordan-type classification
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config import lab_config

logger = logging.getLogger(__name__)


# ============================================
# Errors
# ============================================

class GeometryError(Exception):
    """Base class for geometric failures"""


class DimensionMismatch(GeometryError, ValueError):
    """Vector or matrix dimensions do not agree with the signature"""


class DegenerateMetric(GeometryError):
    """The induced Gram form has a (numerically) zero eigenvalue"""


class NormalNotFound(GeometryError):
    """The orthogonal complement of a tangent space is null or not one-dimensional"""


class UnsupportedDimension(GeometryError, ValueError):
    """Operation is only defined for small operators"""


# ============================================
# Types
# ============================================

@dataclass(frozen=True)
class Signature:
    """Pseudo-Euclidean signature: the first `index` coordinates are timelike"""
    dim: int
    index: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be positive, got {self.dim}")
        if not 0 <= self.index <= self.dim:
            raise ValueError(f"index must satisfy 0 <= t <= n, got t={self.index}, n={self.dim}")

    @property
    def signs(self) -> np.ndarray:
        signs = np.ones(self.dim)
        signs[:self.index] = -1.0
        return signs

    def metric(self) -> np.ndarray:
        return np.diag(self.signs)

    def gram(self, vectors) -> np.ndarray:
        """Gram matrix <v_i, v_j> of the rows of `vectors`"""
        vecs = np.atleast_2d(np.asarray(vectors, dtype=float))
        if vecs.shape[-1] != self.dim:
            raise DimensionMismatch(f"vectors have length {vecs.shape[-1]}, signature dim is {self.dim}")
        return (vecs * self.signs) @ vecs.T

    def flipped(self) -> 'Signature':
        """Signature of the negated metric, with timelike coordinates reordered first"""
        return Signature(self.dim, self.dim - self.index)


@dataclass(frozen=True)
class Frame:
    """
    Pseudo-orthonormal frame

    vectors: rows e_k in flat coordinates
    signs: epsilon_k = <e_k, e_k>
    transform: P with e_k = sum_i P[i, k] b_i over the input basis b_i
    """
    vectors: np.ndarray
    signs: Tuple[int, ...]
    transform: np.ndarray
    signature: Signature

    def metric_residual(self) -> float:
        """max |<e_i, e_j> - eps_i delta_ij|"""
        gram = self.signature.gram(self.vectors)
        return float(np.max(np.abs(gram - np.diag(self.signs))))

    @property
    def negative_count(self) -> int:
        return sum(1 for s in self.signs if s < 0)


JORDAN_TAGS = ('I', 'II', 'III', 'IV')


@dataclass(frozen=True)
class JordanType:
    """
    Jordan canonical type of a self-adjoint operator of a Lorentzian space

    I: diagonalizable with real eigenvalues
    II: real eigenvalue a0 carrying a 2x2 nilpotent block
    III: real eigenvalue a0 carrying a 3x3 block
    IV: complex pair a0 +/- i b0
    """
    tag: str
    eigenvalues: Tuple[float, ...] = ()
    a0: Optional[float] = None
    b0: Optional[float] = None
    nilpotent_block: int = 0
    near_degenerate: bool = False

    def __post_init__(self):
        if self.tag not in JORDAN_TAGS:
            raise ValueError(f"Unknown Jordan tag: {self.tag}")
        if self.tag == 'IV' and not self.b0:
            raise ValueError("Type IV requires a non-zero imaginary part b0")

    def to_dict(self) -> dict:
        return {
            'tag': self.tag,
            'eigenvalues': list(self.eigenvalues),
            'a0': self.a0,
            'b0': self.b0,
            'nilpotent_block': self.nilpotent_block,
            'near_degenerate': self.near_degenerate,
        }


# ============================================
# Operations
# ============================================

def pseudo_dot(x, y, sig: Signature) -> float:
    """-sum_{i<=t} x_i y_i + sum_{i>t} x_i y_i"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (sig.dim,) or y.shape != (sig.dim,):
        raise DimensionMismatch(
            f"pseudo_dot expects two vectors of length {sig.dim}, got {x.shape} and {y.shape}"
        )
    return float(np.dot(x * sig.signs, y))


def orthonormalize(basis: Sequence, sig: Signature, tol: Optional[float] = None) -> Frame:
    """
    Pseudo-orthonormal frame spanning the same subspace as `basis`.

    The Gram matrix G_ij = <b_i, b_j> is eigendecomposed; each eigenvector
    combination is scaled by 1/sqrt|lambda_k| and takes the sign of lambda_k.
    Negative directions come first (eigenvalues in ascending order).
    Eigenvalues with |lambda| <= tol * max(1, |G|) raise DegenerateMetric.
    """
    tol = lab_config.tol if tol is None else tol
    vecs = np.atleast_2d(np.asarray(basis, dtype=float))
    if vecs.shape[-1] != sig.dim:
        raise DimensionMismatch(f"basis vectors have length {vecs.shape[-1]}, signature dim is {sig.dim}")

    gram = sig.gram(vecs)
    gram = 0.5 * (gram + gram.T)
    eigvals, eigvecs = np.linalg.eigh(gram)
    threshold = tol * max(1.0, float(np.max(np.abs(gram))))
    if np.any(np.abs(eigvals) <= threshold):
        raise DegenerateMetric(
            f"Gram matrix is degenerate: eigenvalues {eigvals.tolist()} (threshold {threshold:.3e})"
        )

    # deterministic eigenvector orientation: largest component positive
    for k in range(eigvecs.shape[1]):
        pivot = int(np.argmax(np.abs(eigvecs[:, k])))
        if eigvecs[pivot, k] < 0:
            eigvecs[:, k] = -eigvecs[:, k]

    transform = eigvecs / np.sqrt(np.abs(eigvals))
    frame_vectors = transform.T @ vecs
    signs = tuple(int(np.sign(v)) for v in eigvals)
    frame_vectors.setflags(write=False)
    transform.setflags(write=False)
    return Frame(vectors=frame_vectors, signs=signs, transform=transform, signature=sig)


def _rank(matrix: np.ndarray, threshold: float) -> int:
    return int(np.linalg.matrix_rank(matrix, tol=threshold))


def _classify_2x2(A: np.ndarray, tol: float, scale: float) -> JordanType:
    trace = A[0, 0] + A[1, 1]
    disc = (A[0, 0] - A[1, 1]) ** 2 + 4.0 * A[0, 1] * A[1, 0]
    disc_tol = tol * scale ** 2
    separation = float(np.sqrt(abs(disc)))
    near = separation < 100.0 * tol * scale

    if disc < -disc_tol:
        return JordanType('IV', a0=trace / 2.0, b0=separation / 2.0, near_degenerate=near)
    if disc > disc_tol:
        eig = sorted(((trace - separation) / 2.0, (trace + separation) / 2.0))
        return JordanType('I', eigenvalues=tuple(eig), near_degenerate=near)

    lam = trace / 2.0
    nilpotent = A - lam * np.eye(2)
    if np.max(np.abs(nilpotent)) <= np.sqrt(tol) * scale:
        return JordanType('I', eigenvalues=(lam, lam), near_degenerate=near)
    return JordanType('II', eigenvalues=(lam, lam), a0=lam, nilpotent_block=2, near_degenerate=near)


def _classify_3x3(A: np.ndarray, tol: float, scale: float) -> JordanType:
    eig = np.linalg.eigvals(A)
    rank_tol = np.sqrt(tol) * scale
    complex_idx = [i for i, v in enumerate(eig) if abs(v.imag) > rank_tol]
    if complex_idx:
        pair = eig[complex_idx[0]]
        real_rest = [float(v.real) for i, v in enumerate(eig) if i not in complex_idx]
        b0 = abs(float(pair.imag))
        return JordanType('IV', eigenvalues=tuple(real_rest), a0=float(pair.real), b0=b0,
                          near_degenerate=2 * b0 < 100.0 * tol * scale)

    values = sorted(float(v.real) for v in eig)
    cluster_tol = tol ** (1.0 / 3.0) * scale
    clusters: List[List[float]] = [[values[0]]]
    for v in values[1:]:
        if v - clusters[-1][-1] <= cluster_tol:
            clusters[-1].append(v)
        else:
            clusters.append([v])
    gaps = np.diff(values)
    near = bool(np.any(gaps < 100.0 * tol * scale))

    eye = np.eye(3)
    for cluster in clusters:
        size = len(cluster)
        if size == 1:
            continue
        lam = float(np.mean(cluster))
        nilpotent = A - lam * eye
        nullity = 3 - _rank(nilpotent, rank_tol)
        if nullity >= size:
            continue
        eigenvalues = tuple(lam if v in cluster else v for v in values)
        if size == 3 and nullity == 1:
            if _rank(nilpotent @ nilpotent, rank_tol * scale) == 1:
                return JordanType('III', eigenvalues=eigenvalues, a0=lam, nilpotent_block=3,
                                  near_degenerate=near)
            logger.warning("Triple eigenvalue with rank(N)=2 but rank(N^2)!=1; reporting type II")
        return JordanType('II', eigenvalues=eigenvalues, a0=lam, nilpotent_block=2,
                          near_degenerate=near)

    return JordanType('I', eigenvalues=tuple(values), near_degenerate=near)


def classify_operator(A, tol: Optional[float] = None) -> JordanType:
    """
    Jordan type (I-IV) of a 2x2 or 3x3 shape matrix given in an orthonormal frame.

    2x2 matrices are decided from the discriminant (a-d)^2 + 4bc, which stays
    accurate for defective matrices whose computed eigenvalues would split.
    Rank decisions use sqrt(tol) relative to max(1, |A|_F).
    """
    tol = lab_config.tol if tol is None else tol
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"classify_operator expects a square matrix, got shape {A.shape}")
    m = A.shape[0]
    if m not in (2, 3):
        raise UnsupportedDimension(f"Jordan classification is implemented for m in (2, 3), got m={m}")
    scale = max(1.0, float(np.linalg.norm(A)))
    jordan = _classify_2x2(A, tol, scale) if m == 2 else _classify_3x3(A, tol, scale)
    if jordan.near_degenerate:
        logger.debug(f"Jordan type {jordan.tag} decided with eigenvalue separation below 100*tol")
    return jordan
