"""
The orthomodular lattice P of projections: orthocomplement, joins and meets through
carriers, compatibility, and suprema of ascending chains.
"""
import logging
from functools import reduce
from typing import NamedTuple, Optional, Sequence

import numpy as np

from constructive_calculus import Method, Reports, carrier, snap_to_projection
from errors import DomainError, InvariantViolation, NotAscending, NotCommuting
from hermitian_core import (
    DEFAULT_TOLERANCES,
    HermitianMatrix,
    Projection,
    ToleranceConfig,
    check_same_dimension,
    commutes,
    loewner_leq,
)

logger = logging.getLogger(__name__)


class MackeyDecomposition(NamedTuple):
    p_only: Projection
    q_only: Projection
    common: Projection


def _lattice_tol(cfg: ToleranceConfig) -> float:
    return 10.0 * cfg.tau_proj


def ortho(p: Projection) -> Projection:
    return p.complement()


def join(
    p: Projection,
    q: Projection,
    config: Optional[ToleranceConfig] = None,
    method: Method = Method.ITERATIVE,
    reports: Reports = None,
) -> Projection:
    """p ∨ q = (p + q)°; compared with p + q − pq when the pair commutes."""
    cfg = config or DEFAULT_TOLERANCES
    check_same_dimension(p, q)
    result, _ = carrier(p + q, cfg, method, reports)
    if commutes(p, q, cfg):
        expected = p.data + q.data - p.data @ q.data
        residual = float(np.linalg.norm(result.data - expected, 2))
        if residual > _lattice_tol(cfg):
            raise InvariantViolation(f"join of a commuting pair is off p+q−pq by {residual:.3e}")
    return result


def meet(
    p: Projection,
    q: Projection,
    config: Optional[ToleranceConfig] = None,
    method: Method = Method.ITERATIVE,
    reports: Reports = None,
) -> Projection:
    """p ∧ q = 1 − ((1−p) ∨ (1−q))"""
    return ortho(join(ortho(p), ortho(q), config, method, reports))


def join_all(
    projections: Sequence[Projection],
    config: Optional[ToleranceConfig] = None,
    method: Method = Method.ITERATIVE,
    reports: Reports = None,
) -> Projection:
    if not projections:
        raise DomainError("join of an empty family")
    return reduce(lambda acc, p: join(acc, p, config, method, reports), projections)


def meet_all(
    projections: Sequence[Projection],
    config: Optional[ToleranceConfig] = None,
    method: Method = Method.ITERATIVE,
    reports: Reports = None,
) -> Projection:
    if not projections:
        raise DomainError("meet of an empty family")
    return reduce(lambda acc, p: meet(acc, p, config, method, reports), projections)


def mackey_decomposition(
    p: Projection, q: Projection, config: Optional[ToleranceConfig] = None
) -> MackeyDecomposition:
    """
    Split a compatible pair into pairwise orthogonal p − r, q − r and r = pq.

    :raises NotCommuting: p and q do not commute
    """
    cfg = config or DEFAULT_TOLERANCES
    if not commutes(p, q, cfg):
        raise NotCommuting("Mackey decomposition needs commuting projections")
    common = snap_to_projection(HermitianMatrix(p.data @ q.data), cfg)
    p_only = snap_to_projection(p - common, cfg)
    q_only = snap_to_projection(q - common, cfg)
    tol = _lattice_tol(cfg)
    for left, right, label in ((p_only, q_only, "p−r, q−r"), (p_only, common, "p−r, r"), (q_only, common, "q−r, r")):
        residual = float(np.linalg.norm(left.data @ right.data, 2))
        if residual > tol:
            raise InvariantViolation(f"{label} not orthogonal: {residual:.3e}")
    return MackeyDecomposition(p_only, q_only, common)


def is_compatible(p: Projection, q: Projection, config: Optional[ToleranceConfig] = None) -> bool:
    if not commutes(p, q, config):
        return False
    mackey_decomposition(p, q, config)
    return True


def monotone_projection_supremum(
    chain: Sequence[Projection],
    config: Optional[ToleranceConfig] = None,
    method: Method = Method.ITERATIVE,
    reports: Reports = None,
) -> Projection:
    """
    Least upper bound of p₁ ≤ p₂ ≤ … as the carrier of Σ 2^{-k} p_k.

    In finite dimension the chain stabilizes, so the result must equal the last member.

    :raises NotAscending: some p_k ≰ p_{k+1}, or the chain is empty
    """
    cfg = config or DEFAULT_TOLERANCES
    if not chain:
        raise NotAscending("empty chain has no supremum")
    check_same_dimension(*chain)
    for k, (lower, upper) in enumerate(zip(chain, chain[1:])):
        if not loewner_leq(lower, upper, cfg):
            raise NotAscending(f"chain descends between positions {k} and {k + 1}")
    weighted = sum((2.0 ** -(k + 1) * p.data for k, p in enumerate(chain)), np.zeros((chain[0].n, chain[0].n)))
    supremum, _ = carrier(HermitianMatrix(weighted), cfg, method, reports)
    residual = supremum.distance(chain[-1])
    if residual > _lattice_tol(cfg):
        raise InvariantViolation(f"supremum differs from the stable chain member by {residual:.3e}")
    return supremum


def orthomodular_check(
    p: Projection,
    q: Projection,
    config: Optional[ToleranceConfig] = None,
    method: Method = Method.ITERATIVE,
) -> bool:
    """p ≤ q ⇒ q = p ∨ (q ∧ (1−p))"""
    cfg = config or DEFAULT_TOLERANCES
    if not loewner_leq(p, q, cfg):
        raise NotAscending("orthomodular law applies to p ≤ q")
    rebuilt = join(p, meet(q, ortho(p), cfg, method), cfg, method)
    return rebuilt.distance(q) <= _lattice_tol(cfg)
