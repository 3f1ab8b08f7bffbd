"""
Randomized checks that dense Hermitian matrices satisfy the e-ring axioms, quadratic
annihilation, the archimedean/halving properties and the commutative Vigier property.

Failures are recorded in the reports, never raised. Each sample draws from its own
generator seeded by (seed, sample index), so results do not depend on thread count.
"""
import logging
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Tuple

import numpy as np

from commutant_blocks import cblock_join, generate_block
from constructive_calculus import Method
from errors import DomainError, HermitiaError
from hermitian_core import (
    DEFAULT_TOLERANCES,
    HermitianMatrix,
    ToleranceConfig,
    commutes,
    is_effect,
    loewner_leq,
)
from utils import (
    from_spectrum,
    grid_spectrum,
    make_rng,
    parallel_map,
    random_effect,
    random_hermitian,
    random_positive,
    random_unitary,
)

logger = logging.getLogger(__name__)

ARCHIMEDEAN_DEPTH = 40
QA_FACTOR = 10.0


@dataclass(frozen=True)
class AxiomReport:
    axiom: str
    samples: int
    failures: Tuple[Tuple[int, float], ...] = ()
    note: str = ""

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "axiom": self.axiom,
            "samples": self.samples,
            "pass": self.passed,
            "failures": [{"seed": seed, "residual": residual} for seed, residual in self.failures],
            "note": self.note,
        }


# A sample returns its violation residual, or None when the property held.
Sample = Callable[[np.random.Generator], Optional[float]]


def _run(
    axiom: str, sample: Sample, samples: int, seed: int, cfg: ToleranceConfig, note: str = ""
) -> AxiomReport:
    if samples < 1:
        raise DomainError("at least one sample is required")

    def one(index: int) -> Optional[Tuple[int, float]]:
        sample_seed = seed * 1_000_003 + index
        try:
            residual = sample(make_rng(sample_seed))
        except HermitiaError as exc:
            logger.warning(f"{axiom}: sample {sample_seed} raised {type(exc).__name__}: {exc}")
            return sample_seed, float("inf")
        return None if residual is None else (sample_seed, float(residual))

    failures = tuple(f for f in parallel_map(one, range(samples), cfg.workers) if f is not None)
    report = AxiomReport(axiom, samples, failures, note)
    logger.info(f"{axiom}: {samples} samples, {len(failures)} failures")
    return report


def _check_dim(dim: int) -> None:
    if dim < 1:
        raise DomainError("dimension must be at least 1")


def _min_eig(g: HermitianMatrix) -> float:
    return float(g.eigen.eigenvalues[0])


def _positive_violation(g: HermitianMatrix, cfg: ToleranceConfig) -> Optional[float]:
    """None when g ⪰ 0, else how far below 0 its spectrum reaches."""
    if loewner_leq(HermitianMatrix.zeros(g.n), g, cfg):
        return None
    return -_min_eig(g)


def _random_e_plus(dim: int, rng: np.random.Generator) -> HermitianMatrix:
    """E⁺ element: a sum of one to three random effects."""
    total = random_effect(dim, rng)
    for _ in range(int(rng.integers(0, 3))):
        total = total + random_effect(dim, rng)
    return total


def _orthogonal_pair(dim: int, rng: np.random.Generator) -> Tuple[HermitianMatrix, HermitianMatrix]:
    """Positive a, b supported on complementary random subspaces; ab = ba = 0 up to rounding."""
    basis = random_unitary(dim, rng)
    split = int(rng.integers(0, dim + 1))
    a_values = np.concatenate([rng.uniform(0.1, 1.0, split), np.zeros(dim - split)])
    b_values = np.concatenate([np.zeros(split), rng.uniform(0.1, 1.0, dim - split)])
    return from_spectrum(a_values, basis), from_spectrum(b_values, basis)


def check_ering_axioms(
    dim: int, samples: int, seed: int, config: Optional[ToleranceConfig] = None
) -> List[AxiomReport]:
    """Items (i)–(vi) of the e-ring definition on sampled a, b ∈ E⁺."""
    cfg = config or DEFAULT_TOLERANCES
    _check_dim(dim)
    zero = HermitianMatrix.zeros(dim)
    one = HermitianMatrix.identity(dim)

    def negation_only_zero(rng):
        # a ∈ E⁺ with −a ∈ E⁺ forces a = 0; the witness −a ⪰ 0 occurs only for tiny a
        a = _random_e_plus(dim, rng) * float(rng.choice([1.0, 0.0]))
        if loewner_leq(zero, -a, cfg) and a.norm > cfg.tau_psd * 10.0:
            return a.norm
        return None

    def complement_is_effect(rng):
        a = _random_e_plus(dim, rng)
        if rng.random() < 0.5:
            a = a / (a.norm + 1e-3)
        if loewner_leq(zero, one - a, cfg) and not is_effect(a, cfg):
            return float(a.eigen.eigenvalues[-1] - 1.0)
        return None

    def commuting_product_positive(rng):
        basis = random_unitary(dim, rng)
        a = from_spectrum(rng.uniform(0.0, 2.0, dim), basis)
        b = from_spectrum(rng.uniform(0.0, 2.0, dim), basis)
        if not commutes(a, b, cfg):
            return float(np.linalg.norm(a.data @ b.data - b.data @ a.data, 2))
        return _positive_violation(HermitianMatrix(a.data @ b.data), cfg)

    def sandwich_positive(rng):
        a = _random_e_plus(dim, rng)
        b = _random_e_plus(dim, rng)
        return _positive_violation(HermitianMatrix(a.data @ b.data @ a.data), cfg)

    def sandwich_zero_annihilates(rng):
        a, b = _orthogonal_pair(dim, rng)
        aba = float(np.linalg.norm(a.data @ b.data @ a.data, 2))
        ab = float(np.linalg.norm(a.data @ b.data, 2))
        ba = float(np.linalg.norm(b.data @ a.data, 2))
        tol = cfg.tau_psd * (1.0 + a.norm) * (1.0 + b.norm)
        if aba <= tol and max(ab, ba) > QA_FACTOR * (np.sqrt(aba) + tol):
            return max(ab, ba)
        return None

    def difference_square_positive(rng):
        a = _random_e_plus(dim, rng)
        b = a if rng.random() < 0.1 else _random_e_plus(dim, rng)
        return _positive_violation((a - b).square(), cfg)

    checks = [
        ("ering.i", negation_only_zero, "a and −a in E⁺ only for a = 0; half the samples are a = 0"),
        ("ering.ii", complement_is_effect, "1 − a ∈ E⁺ implies a ∈ E"),
        ("ering.iii", commuting_product_positive, "commuting pairs built in a shared eigenbasis"),
        ("ering.iv", sandwich_positive, "aba ⪰ 0 on sums of random effects"),
        ("ering.v", sandwich_zero_annihilates, "aba = 0 witnessed by orthogonally supported a, b"),
        ("ering.vi", difference_square_positive, "(a − b)² ⪰ 0; a = b in about a tenth of samples"),
    ]
    return [_run(name, fn, samples, seed, cfg, note) for name, fn, note in checks]


def check_qa(dim: int, samples: int, seed: int, config: Optional[ToleranceConfig] = None) -> AxiomReport:
    """
    gh²g = 0 ⇒ gh = hg = 0, on orthogonally supported pairs and on small
    perturbations of them: ‖gh‖ ≤ 10·(√‖gh²g‖ + tol).
    """
    cfg = config or DEFAULT_TOLERANCES
    _check_dim(dim)

    def sample(rng):
        g, h = _orthogonal_pair(dim, rng)
        g = g * float(rng.choice([1.0, -1.0]))
        if rng.random() < 0.5:
            noise = random_hermitian(dim, rng) * (10.0 ** rng.uniform(-12, -6))
            h = h + noise
        gh2g = float(np.linalg.norm(g.data @ h.data @ h.data @ g.data, 2))
        gh = float(np.linalg.norm(g.data @ h.data, 2))
        tol = cfg.tau_psd * (1.0 + g.norm) * (1.0 + h.norm)
        bound = QA_FACTOR * (np.sqrt(gh2g) + tol)
        return gh if gh > bound else None

    return _run(
        "qa",
        sample,
        samples,
        seed,
        cfg,
        "exact annihilation is measure-zero; witnessed by orthogonal supports plus 1e-12..1e-6 perturbations",
    )


def check_archimedean_and_halving(
    dim: int, samples: int, seed: int, config: Optional[ToleranceConfig] = None
) -> AxiomReport:
    """
    ½·1 is an effect with 2·(½·1) = 1, and 2ⁿg ≤ a for all n ≤ 40 forces g ≤ 0
    within tolerance.
    """
    cfg = config or DEFAULT_TOLERANCES
    _check_dim(dim)
    half = HermitianMatrix.scalar(0.5, dim)
    one = HermitianMatrix.identity(dim)

    def sample(rng):
        if not is_effect(half, cfg) or (2.0 * half).distance(one) != 0.0:
            return 1.0
        a = random_positive(dim, rng)
        choice = int(rng.integers(0, 3))
        if choice == 0:
            g = a * 1e-13
        elif choice == 1:
            g = -random_positive(dim, rng)
        else:
            g = random_hermitian(dim, rng) * 1e-3
        bounded = all(loewner_leq(2.0 ** k * g, a, cfg) for k in range(ARCHIMEDEAN_DEPTH + 1))
        top = float(g.eigen.eigenvalues[-1])
        if bounded and top > cfg.tau_psd * (1.0 + a.norm):
            return top
        return None

    return _run(
        "archimedean_halving",
        sample,
        samples,
        seed,
        cfg,
        f"infinitary hypothesis truncated at depth {ARCHIMEDEAN_DEPTH}; conclusion g ≤ tau_psd",
    )


def _least_upper_bound_violation(
    chain: List[HermitianMatrix], limit: HermitianMatrix, basis: np.ndarray, rng, cfg: ToleranceConfig
) -> Optional[float]:
    for member in chain:
        if not loewner_leq(member, limit, cfg):
            return float(np.max(member.eigen.eigenvalues - limit.eigen.eigenvalues[-1]))
        if not commutes(member, limit, cfg):
            return float(np.linalg.norm(member.data @ limit.data - limit.data @ member.data, 2))
    top = chain[-1]
    # upper bounds of the chain that are diagonal in the common basis
    for _ in range(4):
        diag_top = np.real(np.diag(basis.conj().T @ top.data @ basis))
        bound = from_spectrum(diag_top + rng.uniform(0.0, 0.5, len(diag_top)), basis)
        if all(loewner_leq(member, bound, cfg) for member in chain) and not loewner_leq(limit, bound, cfg):
            return limit.distance(bound)
    return None


def check_cv_property(
    dim: int, chain_length: int, seed: int, config: Optional[ToleranceConfig] = None, samples: int = 20
) -> AxiomReport:
    """
    Ascending commuting chains have a least upper bound that commutes with the chain.

    Three chain shapes: partial sums of 2^{-k}·atoms, cumulative C-block joins of a
    commuting family with spectra on a 1/8 grid, and geometric chains (1 − 2^{-m})·q.
    """
    cfg = config or DEFAULT_TOLERANCES
    _check_dim(dim)
    if chain_length < 2:
        raise DomainError("chain_length must be at least 2")

    def sample(rng):
        basis = random_unitary(dim, rng)
        shape = int(rng.integers(0, 3))
        if shape == 0:
            atoms = generate_block([from_spectrum(np.arange(dim, dtype=float), basis)], cfg).atoms
            chain, running = [], np.zeros((dim, dim), dtype=np.complex128)
            for k in range(chain_length):
                running = running + 2.0 ** -(k + 1) * atoms[k % dim].data
                chain.append(HermitianMatrix(running))
            limit = chain[-1]
        elif shape == 1:
            family = [from_spectrum(grid_spectrum(dim, rng), basis) for _ in range(chain_length)]
            chain = [family[0]]
            for member in family[1:]:
                chain.append(cblock_join(chain[-1], member, cfg, Method.ITERATIVE))
            limit = from_spectrum(
                np.max([np.real(np.diag(basis.conj().T @ m.data @ basis)) for m in family], axis=0), basis
            )
        else:
            rank = int(rng.integers(1, dim + 1))
            q = from_spectrum(np.concatenate([np.ones(rank), np.zeros(dim - rank)]), basis)
            chain = [q * (1.0 - 2.0 ** -m) for m in range(1, chain_length + 1)]
            limit = q * (1.0 - 2.0 ** -chain_length)
        for lower, upper in zip(chain, chain[1:]):
            if not loewner_leq(lower, upper, cfg):
                return lower.distance(upper)
        if limit.distance(chain[-1]) > cfg.tau_proj * (1.0 + limit.norm):
            return limit.distance(chain[-1])
        return _least_upper_bound_violation(chain, limit, basis, rng, cfg)

    return _run(
        "cv",
        sample,
        samples,
        seed,
        cfg,
        f"finite chains of length {chain_length}; supremum tested against sampled commuting upper bounds",
    )


def run_default_suite(
    config: Optional[ToleranceConfig] = None,
    dims: Tuple[int, ...] = tuple(range(1, 9)),
    samples: int = 500,
    seed: int = 0,
    chain_length: int = 6,
) -> List[AxiomReport]:
    cfg = config or DEFAULT_TOLERANCES
    reports: List[AxiomReport] = []
    for dim in dims:
        group = [
            *check_ering_axioms(dim, samples, seed, cfg),
            check_qa(dim, samples, seed, cfg),
            check_archimedean_and_halving(dim, samples, seed, cfg),
            check_cv_property(dim, chain_length, seed, cfg, samples=min(samples, 50)),
        ]
        reports.extend(replace(r, axiom=f"{r.axiom}@dim{dim}") for r in group)
    return reports
