"""
Ambient space forms
Flat, pseudo-sphere and pseudo-hyperbolic models as level sets of a flat pseudo-Euclidean space
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from config import lab_config
from pgeom_core import DimensionMismatch, GeometryError, Signature

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpaceForm:
    """
    Space form N^n_t(c)

    c > 0: pseudo-sphere   {x in R^{n+1}_t     : <x,x> = 1/c}
    c < 0: pseudo-hyperbolic {x in R^{n+1}_{t+1} : <x,x> = 1/c}
    c = 0: flat R^n_t
    """
    dim: int
    index: int
    curvature: float

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be positive, got {self.dim}")
        if not 0 <= self.index <= self.dim:
            raise ValueError(f"index must satisfy 0 <= t <= n, got t={self.index}, n={self.dim}")

    @property
    def flat_model(self) -> Signature:
        if self.curvature > 0:
            return Signature(self.dim + 1, self.index)
        if self.curvature < 0:
            return Signature(self.dim + 1, self.index + 1)
        return Signature(self.dim, self.index)

    @property
    def level(self) -> Optional[float]:
        """<x,x> on the model, None for flat space"""
        return 1.0 / self.curvature if self.curvature else None

    @property
    def label(self) -> str:
        if self.curvature > 0:
            return f"S^{self.dim}_{self.index}({self.curvature:g})"
        if self.curvature < 0:
            return f"H^{self.dim}_{self.index}({self.curvature:g})"
        return f"R^{self.dim}_{self.index}"

    def dual(self) -> 'SpaceForm':
        """
        Metric-flip partner: S^n_t(c) <-> H^n_{n-t}(-c), R^n_t <-> R^n_{n-t}.
        The flat models coincide once the flat metric is negated.
        """
        return SpaceForm(self.dim, self.dim - self.index, -self.curvature)


def flat(dim: int, index: int) -> SpaceForm:
    return SpaceForm(dim, index, 0.0)


def sphere(dim: int, index: int, c: float = 1.0) -> SpaceForm:
    if c <= 0:
        raise ValueError(f"pseudo-sphere needs c > 0, got c={c}")
    return SpaceForm(dim, index, float(c))


def hyperbolic(dim: int, index: int, c: float = -1.0) -> SpaceForm:
    if c >= 0:
        raise ValueError(f"pseudo-hyperbolic space needs c < 0, got c={c}")
    return SpaceForm(dim, index, float(c))


def contains(sf: SpaceForm, x, tol: Optional[float] = None) -> bool:
    """True iff |<x,x> - 1/c| < tol; always true in flat space"""
    tol = lab_config.tol if tol is None else tol
    x = np.asarray(x, dtype=float)
    model = sf.flat_model
    if x.shape != (model.dim,):
        raise DimensionMismatch(f"point has shape {x.shape}, flat model dim is {model.dim}")
    if sf.curvature == 0:
        return True
    return abs(float(np.dot(x * model.signs, x)) - sf.level) < tol


def curvature_tensor(sf: SpaceForm, X, Y, Z, point=None, tol: Optional[float] = None) -> np.ndarray:
    """
    R(X,Y)Z = c(<Y,Z>X - <X,Z>Y) in flat-model coordinates.

    When `point` is given the three vectors are validated as tangent there.
    """
    model = sf.flat_model
    X, Y, Z = (np.asarray(v, dtype=float) for v in (X, Y, Z))
    for v in (X, Y, Z):
        if v.shape != (model.dim,):
            raise DimensionMismatch(f"tangent vector has shape {v.shape}, flat model dim is {model.dim}")

    if point is not None and sf.curvature != 0:
        tol = lab_config.tol if tol is None else tol
        p = np.asarray(point, dtype=float)
        scale = max(1.0, float(np.max(np.abs(p))))
        for name, v in (('X', X), ('Y', Y), ('Z', Z)):
            pairing = float(np.dot(v * model.signs, p))
            if abs(pairing) > tol * scale * max(1.0, float(np.max(np.abs(v)))):
                raise GeometryError(f"{name} is not tangent to {sf.label} at the given point (<{name},x> = {pairing:.3e})")

    signs = model.signs
    yz = float(np.dot(Y * signs, Z))
    xz = float(np.dot(X * signs, Z))
    return sf.curvature * (yz * X - xz * Y)
