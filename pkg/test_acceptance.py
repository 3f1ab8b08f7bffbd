# test_acceptance.py
"""
Acceptance sweep over seeded random matrices. pytest runs a few seeds per dimension;
running the module as a script runs the full sample counts on a thread pool:

    python test_acceptance.py
"""
import concurrent.futures
import sys
import time
from collections import Counter
from functools import partial
from typing import Callable, NamedTuple, Sequence

import numpy as np
import pytest

import oracle
from axiom_suite import run_default_suite
from commutant_blocks import cblock_join, cblock_meet
from constructive_calculus import Method, absolute, carrier, polar_decompose, signum, sqrt
from errors import HermitiaError
from hermitian_core import (
    DEFAULT_TOLERANCES,
    HermitianMatrix,
    Projection,
    commutes,
    is_projection,
    loewner_leq,
    order_slack,
)
from projection_lattice import join, meet, ortho, orthomodular_check
from spectral import full_resolution, jump_supremum_check, right_continuity_check, spectral_bounds, step_approximation
from states_norms import one_norm
from utils import (
    from_spectrum,
    grid_spectrum,
    random_commuting_pair,
    random_hermitian,
    random_polynomial_in,
    random_projection,
    random_signed_spectrum,
    random_unitary,
)

DIMS = tuple(range(2, 9))


def _rng(n: int, seed: int) -> np.random.Generator:
    return np.random.default_rng((n, seed))


def _gap(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b, 2))


def oracle_equivalence(n: int, seed: int) -> bool:
    g = random_hermitian(n, _rng(n, seed), low=0.05, high=1.0)
    tol = 1e-7 * (1.0 + g.norm)
    root, _ = sqrt(g)
    return max(
        root.distance(oracle.reference_sqrt(g)),
        absolute(g).distance(oracle.reference_abs(g)),
        signum(g).distance(oracle.reference_sign(g)),
        carrier(g)[0].distance(oracle.reference_support(g)),
    ) <= tol


def square_root_contract(n: int, seed: int) -> bool:
    rng = _rng(n, seed)
    spectrum = rng.uniform(0.05, 1.0, n)
    kernel = rng.random(n) < 0.25
    kernel[0] = False
    spectrum[kernel] = 0.0
    g = random_hermitian(n, rng, spectrum=spectrum)
    root, _ = sqrt(g)
    if not loewner_leq(HermitianMatrix.zeros(n), root):
        return False
    if root.square().distance(g) > 1e-7 * (1.0 + g.norm):
        return False
    return all(commutes(root, random_polynomial_in(g, rng)) for _ in range(20))


def polar_identities(n: int, seed: int) -> bool:
    rng = _rng(n, seed)
    g = random_hermitian(n, rng, spectrum=random_signed_spectrum(n, rng))
    polar = polar_decompose(g)
    s, a, pos, neg = polar.signum.data, polar.abs.data, polar.pos.data, polar.neg.data
    residuals = (
        _gap(s @ a, g.data),
        _gap(a @ s, g.data),
        _gap(s @ s, polar.carrier.data),
        _gap(pos @ neg, np.zeros_like(pos)),
        _gap(pos - neg, g.data),
        _gap(pos + neg, a),
    )
    return max(residuals) <= 1e-7 * (1.0 + g.norm)


def _separated_spectrum(n: int, rng: np.random.Generator, low: float = -1.0, high: float = 1.0) -> np.ndarray:
    """n distinct eigenvalues on a grid of step 0.125."""
    return rng.choice(np.arange(low, high + 0.0625, 0.125), n, replace=False)


def _element(n: int, rng: np.random.Generator, method: Method, low: float = -1.0, high: float = 1.0) -> HermitianMatrix:
    # iterative runs draw eigenvalues 0.125 apart, which keeps every check point a resolvable distance from the spectrum
    if method is Method.ORACLE:
        return random_hermitian(n, rng, low=low, high=high)
    return random_hermitian(n, rng, spectrum=_separated_spectrum(n, rng, low, high))


def step_error_within_mesh(n: int, seed: int, method: Method = Method.ORACLE) -> bool:
    g = _element(n, _rng(n, seed), method, low=-2.0, high=2.0)
    resolution = full_resolution(g, 16, method=method)
    slack = order_slack(g)
    for cells in (2 ** k for k in range(1, 9)):
        step = step_approximation(g, cells, method=method, resolution=resolution)
        if step.achieved_error > step.partition.mesh + slack:
            return False
        if _gap(sum(u.data for u in step.cells), np.eye(n)) > 1e-9:
            return False
    return True


def commutation_through_resolutions(n: int, seed: int, method: Method = Method.ORACLE) -> bool:
    rng = _rng(n, seed)
    if method is not Method.ORACLE:
        basis = random_unitary(n, rng)
        other = basis if seed % 2 else random_unitary(n, rng)
        g = from_spectrum(_separated_spectrum(n, rng), basis)
        h = from_spectrum(_separated_spectrum(n, rng), other)
    elif seed % 2:
        g, h = random_commuting_pair(n, rng)
    else:
        g, h = random_hermitian(n, rng), random_hermitian(n, rng)
    left = full_resolution(g, 16, method=method).breakpoints
    right = full_resolution(h, 16, method=method).breakpoints
    through = all(commutes(p.projection, q.projection) for p in left for q in right)
    return commutes(g, h) == through == bool(seed % 2)


def continuity_and_jumps(n: int, seed: int, method: Method = Method.ORACLE) -> bool:
    g = _element(n, _rng(n, seed), method)
    lam = g.eigen.eigenvalues
    for i, alpha in enumerate(lam):
        below = alpha - lam[i - 1] if i > 0 else 1.0
        above = lam[i + 1] - alpha if i + 1 < n else 1.0
        if below <= DEFAULT_TOLERANCES.cluster_tol or above <= DEFAULT_TOLERANCES.cluster_tol:
            continue
        down = [alpha - below * 2.0 ** -j for j in range(9)]
        up = [alpha + above * 2.0 ** -j for j in range(9)]
        if not jump_supremum_check(g, alpha, method=method, points=down):
            return False
        if not right_continuity_check(g, alpha, method=method, points=up):
            return False
    return True


def norm_identities(n: int, seed: int) -> bool:
    # bisected bounds are good to the order slack, not to rounding
    rng = _rng(n, seed)
    g, h = random_commuting_pair(n, rng, low=-2.0, high=2.0)
    tol = order_slack(g.square())
    bounds = spectral_bounds(g)
    return (
        abs(one_norm(g.square()) - one_norm(g) ** 2) <= tol * (1.0 + g.norm)
        and abs(one_norm(g) - max(abs(bounds.lower), abs(bounds.upper))) <= tol
        and one_norm(HermitianMatrix(g.data @ h.data)) <= one_norm(g) * one_norm(h) + tol * (1.0 + h.norm)
    )


def lattice_laws(n: int, seed: int) -> bool:
    rng = _rng(n, seed)
    p, q = random_projection(n, rng), random_projection(n, rng)
    j, m = join(p, q), meet(p, q)
    if not np.array_equal(ortho(j).data, meet(ortho(p), ortho(q)).data):
        return False
    if not orthomodular_check(p, j):
        return False

    basis = random_unitary(n, rng)
    a, b = rng.integers(0, 2, n), rng.integers(0, 2, n)
    pc = Projection((basis * a.astype(float)) @ basis.conj().T)
    qc = Projection((basis * b.astype(float)) @ basis.conj().T)
    if _gap(join(pc, qc).data, pc.data + qc.data - pc.data @ qc.data) > 1e-7:
        return False
    if _gap(meet(pc, qc).data, pc.data @ qc.data) > 1e-7:
        return False
    disjoint = Projection((basis * (b & (1 - a)).astype(float)) @ basis.conj().T)
    if not is_projection(pc + disjoint):
        return False
    return _gap(pc.data @ disjoint.data, np.zeros((n, n))) <= 1e-7 and is_projection(m)


def cblock_min_max(n: int, seed: int) -> bool:
    rng = _rng(n, seed)
    basis = random_unitary(n, rng)
    a, b = grid_spectrum(n, rng), grid_spectrum(n, rng)
    g, h = from_spectrum(a, basis), from_spectrum(b, basis)
    lower, upper = cblock_meet(g, h), cblock_join(g, h)
    return (
        (lower + upper).distance(g + h) <= 1e-8
        and lower.distance(from_spectrum(np.minimum(a, b), basis)) <= 1e-8
        and upper.distance(from_spectrum(np.maximum(a, b), basis)) <= 1e-8
    )


class Criterion(NamedTuple):
    check: Callable[[int, int], bool]
    dims: Sequence[int]
    full: int
    quick: int


CRITERIA = {
    "oracle equivalence": Criterion(oracle_equivalence, DIMS, 1000, 3),
    "square root contract": Criterion(square_root_contract, DIMS, 200, 2),
    "polar identities": Criterion(polar_identities, DIMS, 1000, 3),
    "step error within mesh": Criterion(step_error_within_mesh, DIMS, 50, 1),
    "commutation through resolutions": Criterion(commutation_through_resolutions, (2, 3, 4, 5, 6), 100, 4),
    "continuity and jumps": Criterion(continuity_and_jumps, DIMS, 100, 2),
    "step error within mesh, iterative": Criterion(
        partial(step_error_within_mesh, method=Method.ITERATIVE), (2, 3, 4), 10, 1
    ),
    "commutation through resolutions, iterative": Criterion(
        partial(commutation_through_resolutions, method=Method.ITERATIVE), (2, 3), 10, 2
    ),
    "continuity and jumps, iterative": Criterion(partial(continuity_and_jumps, method=Method.ITERATIVE), (2, 3), 10, 1),
    "norm identities": Criterion(norm_identities, DIMS, 1000, 3),
    "lattice laws": Criterion(lattice_laws, DIMS, 1000, 3),
    "c-block min and max": Criterion(cblock_min_max, (2, 3, 4, 5, 6), 100, 3),
}


@pytest.mark.parametrize("name", list(CRITERIA))
def test_criterion_holds(name):
    criterion = CRITERIA[name]
    for n in criterion.dims:
        for seed in range(criterion.quick):
            assert criterion.check(n, seed), f"{name} failed at n={n}, seed={seed}"


def test_axiom_suite_passes():
    reports = run_default_suite(dims=(1, 2, 3), samples=10, seed=0, chain_length=4)
    assert all(r.passed for r in reports), [r.to_json() for r in reports if not r.passed]


def _run_case(name: str, n: int, seed: int) -> dict:
    start = time.time()
    try:
        passed = CRITERIA[name].check(n, seed)
        error = None
    except HermitiaError as e:
        passed, error = False, f"{type(e).__name__}: {e}"
    return {"criterion": name, "n": n, "seed": seed, "passed": passed, "error": error, "time": time.time() - start}


def run_full_acceptance() -> bool:
    """Full sample counts for every criterion plus the default axiom suite"""
    print("🔥 Running full acceptance sweep...")

    cases = [(name, n, seed) for name, c in CRITERIA.items() for n in c.dims for seed in range(c.full)]
    start_time = time.time()
    with concurrent.futures.ThreadPoolExecutor(max_workers=8) as executor:
        futures = [executor.submit(_run_case, *case) for case in cases]
        results = [future.result() for future in concurrent.futures.as_completed(futures)]
    total_time = time.time() - start_time

    failed = [r for r in results if not r["passed"]]
    per_criterion = Counter(r["criterion"] for r in results if r["passed"])
    slowest = max(results, key=lambda r: r["time"])

    print(f"📊 Acceptance Results:")
    print(f"   Total cases: {len(results)}")
    print(f"   Passed: {len(results) - len(failed)}")
    print(f"   Failed: {len(failed)}")
    print(f"   Total time: {total_time:.2f}s")
    print(f"   Slowest case: {slowest['criterion']} n={slowest['n']} ({slowest['time']:.3f}s)")
    for name, c in CRITERIA.items():
        print(f"   {name}: {per_criterion[name]}/{len(c.dims) * c.full}")
    for r in failed[:10]:
        print(f"   ❌ {r['criterion']} n={r['n']} seed={r['seed']} {r['error'] or ''}")

    print("🔥 Running default axiom suite...")
    start_time = time.time()
    reports = run_default_suite(DEFAULT_TOLERANCES.with_overrides(workers=8))
    broken = [r.axiom for r in reports if not r.passed]
    print(f"   Reports: {len(reports)}, failing: {broken or 'none'}")
    print(f"   Total time: {time.time() - start_time:.2f}s")
    return not failed and not broken


if __name__ == "__main__":
    sys.exit(0 if run_full_acceptance() else 1)
