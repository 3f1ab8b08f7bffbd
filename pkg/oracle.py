"""
Reference eigen-decomposition (cyclic complex Jacobi) and the spectral functional
calculus built on it. Used for validation and by the oracle method.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from errors import DomainError, NoConvergence
from hermitian_core import DEFAULT_TOLERANCES, HermitianMatrix, Projection, ToleranceConfig

logger = logging.getLogger(__name__)

SWEEP_CAP = 100
OFF_DIAGONAL_TOL = 1e-13


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # columns, orthonormal
    sweeps: int

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _off_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    apq = a[p, q]
    mag = abs(apq)
    if mag == 0.0:
        return
    phase = np.conj(apq / mag)
    theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
    if abs(theta) > 1e150:
        t = 0.5 / theta
    else:
        t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
        if theta < 0:
            t = -t
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c
    rot = np.array([[c, s], [-s * phase, c * phase]], dtype=np.complex128)
    idx = [p, q]
    a[:, idx] = a[:, idx] @ rot
    a[idx, :] = rot.conj().T @ a[idx, :]
    a[p, q] = a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real
    v[:, idx] = v[:, idx] @ rot


def eig(g: Union[HermitianMatrix, np.ndarray], sweep_cap: int = SWEEP_CAP) -> EigenDecomposition:
    """
    Cyclic row-order Jacobi with complex phase-adjusted rotations.

    :param g: Hermitian matrix
    :param sweep_cap: maximum number of full sweeps
    :return: EigenDecomposition with ascending eigenvalues
    """
    a = np.array(g.data if isinstance(g, HermitianMatrix) else g, dtype=np.complex128)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    target = OFF_DIAGONAL_TOL * float(np.linalg.norm(a))
    sweeps = 0
    while _off_norm(a) > target:
        if sweeps >= sweep_cap:
            raise NoConvergence(f"Jacobi did not converge in {sweep_cap} sweeps (off = {_off_norm(a):.3e})")
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                _rotate(a, v, p, q)
    lam = a.diagonal().real
    order = np.argsort(lam, kind="stable")
    return EigenDecomposition(lam[order].copy(), v[:, order].copy(), sweeps)


def _decomposition(g: HermitianMatrix) -> EigenDecomposition:
    return g.eigen if isinstance(g, HermitianMatrix) else eig(g)


def apply_scalar_function(g: HermitianMatrix, f: Callable[[float], float]) -> HermitianMatrix:
    """f(g) = V·diag(f(λ))·V†"""
    dec = _decomposition(g)
    values = np.array([f(float(x)) for x in dec.eigenvalues], dtype=float)
    v = dec.eigenvectors
    return HermitianMatrix((v * values) @ v.conj().T)


def _spectral_projection(g: HermitianMatrix, mask: np.ndarray) -> Projection:
    v = g.eigen.eigenvectors
    return Projection((v * mask.astype(float)) @ v.conj().T)


def _tol(g: HermitianMatrix, config: Optional[ToleranceConfig]) -> float:
    cfg = config or DEFAULT_TOLERANCES
    return cfg.tau_psd * (1.0 + g.norm)


def reference_sqrt(g: HermitianMatrix, config: Optional[ToleranceConfig] = None) -> HermitianMatrix:
    lam = g.eigen.eigenvalues
    if lam[0] < -_tol(g, config):
        raise DomainError(f"square root of a matrix with eigenvalue {lam[0]:.3e}")
    return apply_scalar_function(g, lambda x: np.sqrt(max(x, 0.0)))


def reference_abs(g: HermitianMatrix) -> HermitianMatrix:
    return apply_scalar_function(g, abs)


def reference_pos(g: HermitianMatrix) -> HermitianMatrix:
    return apply_scalar_function(g, lambda x: max(x, 0.0))


def reference_neg(g: HermitianMatrix) -> HermitianMatrix:
    return apply_scalar_function(g, lambda x: max(-x, 0.0))


def reference_sign(g: HermitianMatrix, config: Optional[ToleranceConfig] = None) -> HermitianMatrix:
    tol = _tol(g, config)
    return apply_scalar_function(g, lambda x: 0.0 if abs(x) <= tol else float(np.sign(x)))


def reference_support(
    g: HermitianMatrix, config: Optional[ToleranceConfig] = None, tol: Optional[float] = None
) -> Projection:
    if tol is None:
        tol = _tol(g, config)
    return _spectral_projection(g, np.abs(g.eigen.eigenvalues) > tol)


def reference_threshold(g: HermitianMatrix, lam: float, config: Optional[ToleranceConfig] = None) -> Projection:
    """Projection onto eigenvectors with eigenvalue ≤ lam."""
    return _spectral_projection(g, g.eigen.eigenvalues <= lam + _tol(g, config))


def reference_eigenprojection(g: HermitianMatrix, lam: float, config: Optional[ToleranceConfig] = None) -> Projection:
    return _spectral_projection(g, np.abs(g.eigen.eigenvalues - lam) <= _tol(g, config))


def reference_inverse(g: HermitianMatrix, config: Optional[ToleranceConfig] = None) -> HermitianMatrix:
    lam = g.eigen.eigenvalues
    tol = _tol(g, config)
    if np.any(np.abs(lam) <= tol):
        raise DomainError("matrix is singular within tolerance")
    return apply_scalar_function(g, lambda x: 1.0 / x)
