"""
Dense complex Hermitian matrices: construction, the Loewner order, commutation and
the effect/projection classification of the triple P ⊆ E ⊆ G.
"""
import logging
from functools import cached_property
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, PositiveFloat, PositiveInt

from errors import (
    DimensionMismatch,
    DimensionOutOfRange,
    DocumentError,
    NonFiniteEntry,
    NonSquare,
    NotAnEffect,
    NotHermitian,
    NotProjection,
)

logger = logging.getLogger(__name__)


class ToleranceConfig(BaseModel):
    """Numeric thresholds and iteration caps threaded through every operation."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    tau_sym: PositiveFloat = 1e-12
    tau_psd: PositiveFloat = 1e-9
    tau_proj: PositiveFloat = 1e-8
    tau_comm: PositiveFloat = 1e-9
    tau_conv: PositiveFloat = 1e-11
    max_iter: PositiveInt = 200_000
    bisect_steps: PositiveInt = 80
    max_dim: PositiveInt = 64
    strict: bool = False
    cluster_tol: PositiveFloat = 1e-7
    check_depth: PositiveInt = 8
    workers: PositiveInt = 1

    @classmethod
    def from_yaml(cls, path) -> "ToleranceConfig":
        with open(path, "r", encoding="utf-8") as f:
            try:
                data = yaml.safe_load(f) or {}
            except yaml.YAMLError as exc:
                raise DocumentError(f"{path}: {exc}") from exc
        return cls.model_validate(data)

    def with_overrides(self, **fields) -> "ToleranceConfig":
        return type(self).model_validate({**self.model_dump(), **fields})


DEFAULT_TOLERANCES = ToleranceConfig()


def _symmetrize(arr: np.ndarray) -> np.ndarray:
    sym = 0.5 * (arr + arr.conj().T)
    sym[np.diag_indices_from(sym)] = sym.diagonal().real
    return sym


class HermitianMatrix:
    """
    Immutable n×n complex Hermitian matrix.

    The constructor always stores (A+A†)/2 with a real diagonal, so applying it to an
    already Hermitian array is bit-exact. Validation of raw input lives in make_hermitian.
    """

    # numpy scalars defer to __rmul__ instead of broadcasting over the object
    __array_ufunc__ = None

    def __init__(self, data):
        if isinstance(data, HermitianMatrix):
            data = data.data
        arr = np.array(data, dtype=np.complex128)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise NonSquare(f"expected a square matrix, got shape {arr.shape}")
        self._data = _symmetrize(arr)
        self._data.setflags(write=False)

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def n(self) -> int:
        return self._data.shape[0]

    @cached_property
    def eigen(self):
        # oracle imports this module
        from oracle import eig

        return eig(self)

    @cached_property
    def norm(self) -> float:
        """Operator norm; equals the order-unit norm on this model."""
        return float(np.linalg.norm(self._data, 2))

    @classmethod
    def identity(cls, n: int) -> "HermitianMatrix":
        return cls(np.eye(n))

    @classmethod
    def zeros(cls, n: int) -> "HermitianMatrix":
        return cls(np.zeros((n, n)))

    @classmethod
    def scalar(cls, value: float, n: int) -> "HermitianMatrix":
        return cls(value * np.eye(n))

    @classmethod
    def diag(cls, values: Sequence[float]) -> "HermitianMatrix":
        return cls(np.diag(np.asarray(values, dtype=float)))

    def _other(self, other: "HermitianMatrix") -> np.ndarray:
        if other.n != self.n:
            raise DimensionMismatch(f"dimensions differ: {self.n} vs {other.n}")
        return other.data

    def __add__(self, other):
        if not isinstance(other, HermitianMatrix):
            return NotImplemented
        return HermitianMatrix(self._data + self._other(other))

    def __sub__(self, other):
        if not isinstance(other, HermitianMatrix):
            return NotImplemented
        return HermitianMatrix(self._data - self._other(other))

    def __neg__(self):
        return HermitianMatrix(-self._data)

    def __mul__(self, scalar):
        if isinstance(scalar, (bool, complex, np.complexfloating)) or not np.isscalar(scalar):
            return NotImplemented
        return HermitianMatrix(float(scalar) * self._data)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if isinstance(scalar, (bool, complex, np.complexfloating)) or not np.isscalar(scalar):
            return NotImplemented
        return HermitianMatrix(self._data / float(scalar))

    def __matmul__(self, other) -> np.ndarray:
        """General (not necessarily Hermitian) product."""
        if isinstance(other, HermitianMatrix):
            return self._data @ self._other(other)
        return self._data @ np.asarray(other)

    def square(self) -> "HermitianMatrix":
        return HermitianMatrix(self._data @ self._data)

    def trace(self) -> float:
        return float(np.trace(self._data).real)

    def distance(self, other: "HermitianMatrix") -> float:
        return float(np.linalg.norm(self._data - self._other(other), 2))

    def allclose(self, other: "HermitianMatrix", atol: float) -> bool:
        return bool(np.max(np.abs(self._data - self._other(other)), initial=0.0) <= atol)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n}, data={np.array2string(self._data, precision=6)})"


class Effect(HermitianMatrix):
    """Hermitian matrix with 0 ≤ A ≤ 1 in the Loewner order."""

    @classmethod
    def from_matrix(cls, g: HermitianMatrix, config: Optional[ToleranceConfig] = None) -> "Effect":
        if not is_effect(g, config):
            lam = g.eigen.eigenvalues
            raise NotAnEffect(f"spectrum [{lam[0]:.3e}, {lam[-1]:.3e}] is not inside [0, 1]")
        return cls(g.data)


class Projection(HermitianMatrix):
    """Idempotent effect; element of the orthomodular lattice P."""

    @classmethod
    def from_matrix(cls, g: HermitianMatrix, config: Optional[ToleranceConfig] = None) -> "Projection":
        if not is_projection(g, config):
            raise NotProjection("matrix is not idempotent within tolerance")
        return cls(g.data)

    @property
    def rank(self) -> int:
        return int(round(self.trace()))

    def complement(self) -> "Projection":
        """1 − p, linked both ways so that the complement of the complement is p itself."""
        cached = self.__dict__.get("_complement")
        if cached is None:
            cached = Projection(np.eye(self.n) - self._data)
            cached.__dict__["_complement"] = self
            self.__dict__["_complement"] = cached
        return cached


MatrixLike = Union[HermitianMatrix, np.ndarray, Sequence[Sequence[complex]]]


def make_hermitian(
    raw: MatrixLike, config: Optional[ToleranceConfig] = None, strict: Optional[bool] = None
) -> HermitianMatrix:
    """
    Validate raw entries and return the symmetrized matrix (A+A†)/2.

    :param raw: n×n complex entries
    :param config: tolerances; strict mode and the dimension cap come from here
    :param strict: overrides config.strict; strict mode rejects asymmetry beyond tau_sym
    :return: HermitianMatrix
    """
    cfg = config or DEFAULT_TOLERANCES
    strict = cfg.strict if strict is None else strict
    arr = np.asarray(raw.data if isinstance(raw, HermitianMatrix) else raw, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {arr.shape}")
    n = arr.shape[0]
    if not 1 <= n <= cfg.max_dim:
        raise DimensionOutOfRange(f"dimension {n} outside supported range 1..{cfg.max_dim}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteEntry("matrix contains NaN or infinite entries")
    if strict:
        deviation = float(np.max(np.abs(arr - arr.conj().T)))
        if deviation > cfg.tau_sym * (1.0 + float(np.max(np.abs(arr)))):
            raise NotHermitian(f"‖A − A†‖ = {deviation:.3e} exceeds tau_sym")
    return HermitianMatrix(arr)


def check_same_dimension(*matrices: HermitianMatrix) -> int:
    dims = {m.n for m in matrices}
    if len(dims) != 1:
        raise DimensionMismatch(f"dimensions differ: {sorted(dims)}")
    return dims.pop()


def order_slack(g: HermitianMatrix, config: Optional[ToleranceConfig] = None) -> float:
    """Largest amount by which a bisected spectral bound of g can sit inside the spectrum."""
    cfg = config or DEFAULT_TOLERANCES
    return 4.0 * cfg.tau_psd * (1.0 + g.norm)


def loewner_leq(a: HermitianMatrix, b: HermitianMatrix, config: Optional[ToleranceConfig] = None) -> bool:
    """a ≤ b iff the smallest eigenvalue of b − a is ≥ −tau_psd·(1+‖b−a‖)."""
    cfg = config or DEFAULT_TOLERANCES
    check_same_dimension(a, b)
    diff = b - a
    return bool(diff.eigen.eigenvalues[0] >= -cfg.tau_psd * (1.0 + diff.norm))


def commutes(g: HermitianMatrix, h: HermitianMatrix, config: Optional[ToleranceConfig] = None) -> bool:
    cfg = config or DEFAULT_TOLERANCES
    check_same_dimension(g, h)
    commutator = g.data @ h.data - h.data @ g.data
    return bool(np.linalg.norm(commutator, 2) <= cfg.tau_comm * (1.0 + g.norm) * (1.0 + h.norm))


def jordan_product(g: HermitianMatrix, h: HermitianMatrix) -> HermitianMatrix:
    check_same_dimension(g, h)
    return HermitianMatrix(0.5 * (g.data @ h.data + h.data @ g.data))


def compress(p: HermitianMatrix, g: HermitianMatrix) -> HermitianMatrix:
    """pgp"""
    check_same_dimension(p, g)
    return HermitianMatrix(p.data @ g.data @ p.data)


def is_effect(g: HermitianMatrix, config: Optional[ToleranceConfig] = None) -> bool:
    cfg = config or DEFAULT_TOLERANCES
    lam = g.eigen.eigenvalues
    tol = cfg.tau_psd * (1.0 + g.norm)
    return bool(lam[0] >= -tol and lam[-1] <= 1.0 + tol)


def is_projection(g: HermitianMatrix, config: Optional[ToleranceConfig] = None) -> bool:
    """
    Idempotence within tau_proj, spectrum within tau_proj of {0, 1}, and the power
    characterization p² = p³ as a cross-check.
    """
    cfg = config or DEFAULT_TOLERANCES
    tol = cfg.tau_proj * (1.0 + g.norm)
    sq = g.data @ g.data
    if np.linalg.norm(sq - g.data, 2) > tol:
        return False
    if np.linalg.norm(sq @ g.data - sq, 2) > tol:
        return False
    lam = g.eigen.eigenvalues
    return bool(np.all(np.minimum(np.abs(lam), np.abs(lam - 1.0)) <= tol))


def _gershgorin(g: HermitianMatrix) -> Tuple[float, float]:
    centers = g.data.diagonal().real
    radii = np.sum(np.abs(g.data), axis=1) - np.abs(centers)
    return float(np.min(centers - radii)), float(np.max(centers + radii))


def lower_bound(g: HermitianMatrix, config: Optional[ToleranceConfig] = None) -> float:
    """L_g = sup{λ : λ·1 ≤ g}, by bisection on the order inside the Gershgorin bracket."""
    cfg = config or DEFAULT_TOLERANCES
    lo, hi = _gershgorin(g)
    if loewner_leq(HermitianMatrix.scalar(hi, g.n), g, cfg):
        return hi
    for _ in range(cfg.bisect_steps):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if loewner_leq(HermitianMatrix.scalar(mid, g.n), g, cfg):
            lo = mid
        else:
            hi = mid
    return lo


def upper_bound(g: HermitianMatrix, config: Optional[ToleranceConfig] = None) -> float:
    """U_g = inf{λ : g ≤ λ·1}, by bisection on the order inside the Gershgorin bracket."""
    cfg = config or DEFAULT_TOLERANCES
    lo, hi = _gershgorin(g)
    if loewner_leq(g, HermitianMatrix.scalar(lo, g.n), cfg):
        return lo
    for _ in range(cfg.bisect_steps):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if loewner_leq(g, HermitianMatrix.scalar(mid, g.n), cfg):
            hi = mid
        else:
            lo = mid
    return hi


def order_bounds(g: HermitianMatrix, config: Optional[ToleranceConfig] = None) -> Tuple[float, float]:
    return lower_bound(g, config), upper_bound(g, config)


def effect_scale(g: HermitianMatrix, config: Optional[ToleranceConfig] = None) -> float:
    """
    U_g padded by the bisection slack, so that g / effect_scale(g) ≤ 1 for g ⪰ 0.
    Always strictly positive.
    """
    slack = order_slack(g, config)
    return max(upper_bound(g, config), 0.0) + slack
