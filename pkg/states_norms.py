"""
Vector states ω_ψ(g) = ⟨gψ, ψ⟩ and the order-unit norm
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from errors import DimensionMismatch, DomainError, InvariantViolation
from hermitian_core import DEFAULT_TOLERANCES, HermitianMatrix, ToleranceConfig, order_slack
from spectral import spectral_bounds
from utils import make_rng, random_amplitudes

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class VectorState:
    psi: np.ndarray

    def __post_init__(self):
        psi = np.array(self.psi, dtype=np.complex128).ravel()
        if abs(np.linalg.norm(psi) - 1.0) > 1e-12:
            raise DomainError(f"state vector has norm {np.linalg.norm(psi):.15f}")
        psi.setflags(write=False)
        object.__setattr__(self, "psi", psi)

    @classmethod
    def from_amplitudes(cls, amplitudes) -> "VectorState":
        psi = np.asarray(amplitudes, dtype=np.complex128)
        return cls(psi / np.linalg.norm(psi))

    @classmethod
    def basis(cls, n: int, index: int) -> "VectorState":
        return cls(np.eye(n)[index])

    @property
    def n(self) -> int:
        return self.psi.shape[0]


def random_state(n: int, rng: np.random.Generator) -> VectorState:
    return VectorState(random_amplitudes(n, rng))


def evaluate(state: VectorState, g: HermitianMatrix) -> float:
    if state.n != g.n:
        raise DimensionMismatch(f"state of dimension {state.n} applied to a {g.n}×{g.n} matrix")
    return float(np.vdot(state.psi, g.data @ state.psi).real)


def one_norm(g: HermitianMatrix, config: Optional[ToleranceConfig] = None) -> float:
    """inf{λ ≥ 0 : −λ·1 ≤ g ≤ λ·1} = max(|L_g|, |U_g|)"""
    return spectral_bounds(g, config).norm


def eigenvector_states(g: HermitianMatrix) -> List[VectorState]:
    v = g.eigen.eigenvectors
    return [VectorState(v[:, i]) for i in range(g.n)]


def state_range(
    g: HermitianMatrix, samples: int, seed: Optional[int] = None, config: Optional[ToleranceConfig] = None
) -> Tuple[float, float]:
    """
    Observed range of ω(g) over seeded random states plus the extreme eigenvector states.

    The range is checked to lie within the spectral bounds.
    """
    cfg = config or DEFAULT_TOLERANCES
    if samples < 1:
        raise DomainError("state_range needs at least one sample")
    rng = make_rng(seed)
    extremes = eigenvector_states(g)
    states = [random_state(g.n, rng) for _ in range(samples)] + [extremes[0], extremes[-1]]
    values = [evaluate(state, g) for state in states]
    low, high = min(values), max(values)
    bounds = spectral_bounds(g, cfg)
    slack = order_slack(g, cfg)
    if low < bounds.lower - slack or high > bounds.upper + slack:
        raise InvariantViolation(f"state values [{low}, {high}] escape bounds [{bounds.lower}, {bounds.upper}]")
    return low, high


def order_determined(g: HermitianMatrix, h: HermitianMatrix, config: Optional[ToleranceConfig] = None) -> bool:
    """g ≤ h decided by the eigenvector states of h − g."""
    cfg = config or DEFAULT_TOLERANCES
    diff = h - g
    tol = cfg.tau_psd * (1.0 + diff.norm)
    return all(evaluate(state, g) <= evaluate(state, h) + tol for state in eigenvector_states(diff))
