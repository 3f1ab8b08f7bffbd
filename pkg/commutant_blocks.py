"""
Commutants of finite families, blocks of P generated by commuting families, and the
lattice operations of a C-block.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from constructive_calculus import Method, Reports, absolute, carrier, pos_part, sqrt
from errors import DomainError, HermitiaError, InvariantViolation, NotCommuting
from hermitian_core import (
    DEFAULT_TOLERANCES,
    HermitianMatrix,
    Projection,
    ToleranceConfig,
    check_same_dimension,
    commutes,
    jordan_product,
    loewner_leq,
)
from spectral import spectral_projection

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CommutingFamily:
    members: Tuple[HermitianMatrix, ...]
    common_basis: np.ndarray


@dataclass(frozen=True)
class Block:
    """Pairwise orthogonal atoms summing to 1, ordered by joint eigenvalue."""

    atoms: Tuple[Projection, ...]
    family: CommutingFamily
    joint_spectrum: Tuple[Tuple[float, ...], ...]

    @property
    def degenerate(self) -> bool:
        return any(atom.rank > 1 for atom in self.atoms)

    def coordinates(self, g: HermitianMatrix) -> np.ndarray:
        """Coefficients c_i with g ≈ Σ c_i·atom_i."""
        return np.array([np.trace(atom.data @ g.data).real / atom.rank for atom in self.atoms])

    def reconstruct(self, g: HermitianMatrix) -> HermitianMatrix:
        coefficients = self.coordinates(g)
        return HermitianMatrix(sum(c * atom.data for c, atom in zip(coefficients, self.atoms)))


@dataclass(frozen=True)
class ClosureReport:
    closed: bool
    checked: int
    violations: Tuple[str, ...]
    degenerate: bool

    def to_json(self) -> dict:
        return {
            "closed": self.closed,
            "checked": self.checked,
            "violations": list(self.violations),
            "degenerate": self.degenerate,
        }


def in_commutant(
    h: HermitianMatrix, family: Sequence[HermitianMatrix], config: Optional[ToleranceConfig] = None
) -> bool:
    for member in family:
        check_same_dimension(h, member)
    return all(commutes(h, member, config) for member in family)


def _require_commuting(members: Sequence[HermitianMatrix], cfg: ToleranceConfig) -> None:
    for i, g in enumerate(members):
        for j in range(i + 1, len(members)):
            if not commutes(g, members[j], cfg):
                raise NotCommuting(f"members {i} and {j} do not commute")


def _clusters(values: np.ndarray, tol: float) -> List[List[int]]:
    groups = [[0]]
    for i in range(1, len(values)):
        if values[i] - values[i - 1] > tol:
            groups.append([i])
        else:
            groups[-1].append(i)
    return groups


def generate_block(family: Sequence[HermitianMatrix], config: Optional[ToleranceConfig] = None) -> Block:
    """
    Recursive simultaneous diagonalization: split the whole space by the eigenspaces of
    the first member, each piece by the eigenspaces of the next member compressed onto
    it, and so on. The final pieces are the joint eigenspaces.

    :raises NotCommuting: some pair of members does not commute
    """
    cfg = config or DEFAULT_TOLERANCES
    members = tuple(family)
    if not members:
        raise DomainError("cannot generate a block from an empty family")
    n = check_same_dimension(*members)
    _require_commuting(members, cfg)

    subspaces = [np.eye(n, dtype=np.complex128)]
    for g in members:
        tol = cfg.cluster_tol * (1.0 + g.norm)
        refined = []
        for basis in subspaces:
            dec = HermitianMatrix(basis.conj().T @ g.data @ basis).eigen
            rotated = basis @ dec.eigenvectors
            refined.extend(rotated[:, group] for group in _clusters(dec.eigenvalues, tol))
        subspaces = refined

    atoms = tuple(Projection(q @ q.conj().T) for q in subspaces)
    joint = tuple(
        tuple(float(np.trace(q.conj().T @ g.data @ q).real) / q.shape[1] for g in members) for q in subspaces
    )
    block = Block(atoms, CommutingFamily(members, np.hstack(subspaces)), joint)

    for i, g in enumerate(members):
        residual = block.reconstruct(g).distance(g)
        if residual > max(1e-8, cfg.cluster_tol) * (1.0 + g.norm):
            raise InvariantViolation(f"member {i} is not a combination of atoms (residual {residual:.3e})")
    if block.degenerate:
        logger.debug(f"block of {len(atoms)} atoms has a degenerate joint spectrum")
    return block


def cblock_meet(
    g: HermitianMatrix,
    h: HermitianMatrix,
    config: Optional[ToleranceConfig] = None,
    method: Method = Method.ITERATIVE,
    reports: Reports = None,
) -> HermitianMatrix:
    """g ∧ h = g − (g − h)⁺ inside a C-block."""
    cfg = config or DEFAULT_TOLERANCES
    if not commutes(g, h, cfg):
        raise NotCommuting("C-block meet needs a commuting pair")
    return g - pos_part(g - h, cfg, method, reports)


def cblock_join(
    g: HermitianMatrix,
    h: HermitianMatrix,
    config: Optional[ToleranceConfig] = None,
    method: Method = Method.ITERATIVE,
    reports: Reports = None,
) -> HermitianMatrix:
    """g ∨ h = g + (h − g)⁺ inside a C-block."""
    cfg = config or DEFAULT_TOLERANCES
    if not commutes(g, h, cfg):
        raise NotCommuting("C-block join needs a commuting pair")
    return g + pos_part(h - g, cfg, method, reports)


def cblock_meet_by_comparability(
    g: HermitianMatrix,
    h: HermitianMatrix,
    config: Optional[ToleranceConfig] = None,
    method: Method = Method.ITERATIVE,
) -> HermitianMatrix:
    """ph + (1−p)g with p = ((g−h)⁺)°, checked against cblock_meet."""
    cfg = config or DEFAULT_TOLERANCES
    if not commutes(g, h, cfg):
        raise NotCommuting("C-block meet needs a commuting pair")
    diff = g - h
    p, _ = carrier(pos_part(diff, cfg, method), cfg, method, cutoff=cfg.tau_psd * (1.0 + diff.norm))
    result = HermitianMatrix(p.data @ h.data + p.complement().data @ g.data)
    residual = result.distance(cblock_meet(g, h, cfg, method))
    if residual > cfg.tau_proj * (1.0 + g.norm + h.norm):
        raise InvariantViolation(f"comparability meet differs from g − (g−h)⁺ by {residual:.3e}")
    return result


def _closure_candidates(block: Block, cfg: ToleranceConfig, method: Method):
    members = block.family.members
    zero = HermitianMatrix.zeros(members[0].n)
    for i, g in enumerate(members):
        yield f"square[{i}]", lambda g=g: g.square()
        yield f"abs[{i}]", lambda g=g: absolute(g, cfg, method)
        yield f"carrier[{i}]", lambda g=g: carrier(g, cfg, method)[0]
        if loewner_leq(zero, g, cfg):
            yield f"sqrt[{i}]", lambda g=g: sqrt(g, cfg, method)[0]
        levels = sorted({round(joint[i], 9) for joint in block.joint_spectrum})
        lam = 0.5 * (levels[0] + levels[1]) if len(levels) > 1 else levels[0] + 1.0
        yield f"spectral[{i}]@{lam:.6g}", lambda g=g, lam=lam: spectral_projection(g, lam, cfg, method)
        for j in range(i + 1, len(members)):
            h = members[j]
            yield f"product[{i},{j}]", lambda g=g, h=h: HermitianMatrix(g.data @ h.data)
            yield f"jordan[{i},{j}]", lambda g=g, h=h: jordan_product(g, h)
            yield f"sum[{i},{j}]", lambda g=g, h=h: g + h


def verify_cblock_closure(
    family: Sequence[HermitianMatrix],
    config: Optional[ToleranceConfig] = None,
    method: Method = Method.ITERATIVE,
) -> ClosureReport:
    """
    Build elements from the family (products, Jordan products, square roots, abs,
    carriers, spectral projections) and check each stays in the commutant of the block.
    """
    cfg = config or DEFAULT_TOLERANCES
    block = generate_block(family, cfg)
    violations = []
    checked = 0
    for label, build in _closure_candidates(block, cfg, method):
        checked += 1
        try:
            element = build()
        except HermitiaError as exc:
            violations.append(f"{label}: {type(exc).__name__}: {exc}")
            continue
        if not in_commutant(element, block.atoms, cfg):
            violations.append(f"{label}: leaves the commutant of the block")
    if violations:
        logger.warning(f"C-block closure failed for {len(violations)} of {checked} elements")
    return ClosureReport(not violations, checked, tuple(violations), block.degenerate)
