import numpy as np
import pytest

from commutant_blocks import (
    cblock_join,
    cblock_meet,
    cblock_meet_by_comparability,
    generate_block,
    in_commutant,
    verify_cblock_closure,
)
from constructive_calculus import Method
from errors import DimensionMismatch, DomainError, NotCommuting
from hermitian_core import HermitianMatrix, Projection, commutes, loewner_leq
from spectral import full_resolution
from states_norms import one_norm
from utils import from_spectrum, grid_spectrum, random_hermitian, random_unitary

TOL = 1e-8


def test_in_commutant(pauli_x, pauli_z):
    family = [HermitianMatrix.diag([1, 2]), HermitianMatrix.diag([3, 3])]
    assert in_commutant(HermitianMatrix.diag([5, -1]), family)
    assert not in_commutant(pauli_x, family)
    assert in_commutant(pauli_x, [])
    with pytest.raises(DimensionMismatch):
        in_commutant(pauli_z, [HermitianMatrix.identity(3)])


def test_block_of_single_diagonal():
    block = generate_block([HermitianMatrix.diag([1, 2, 3])])
    expected = [np.diag(row) for row in np.eye(3)]
    assert len(block.atoms) == 3
    for atom, e in zip(block.atoms, expected):
        assert np.allclose(atom.data, e, atol=1e-12)
    assert not block.degenerate


def test_block_of_identity():
    block = generate_block([HermitianMatrix.identity(3)])
    assert len(block.atoms) == 1
    assert block.atoms[0].allclose(HermitianMatrix.identity(3), 1e-12)
    assert block.degenerate


def test_block_refines_across_members():
    block = generate_block([HermitianMatrix.diag([1, 1, 2]), HermitianMatrix.diag([3, 4, 4])])
    assert len(block.atoms) == 3
    for atom, e in zip(block.atoms, np.eye(3)):
        assert np.allclose(atom.data, np.diag(e), atol=1e-12)
    assert np.allclose(block.joint_spectrum, [[1.0, 3.0], [1.0, 4.0], [2.0, 4.0]])


def test_block_rejects_bad_families(pauli_x, pauli_z):
    with pytest.raises(NotCommuting):
        generate_block([pauli_x, pauli_z])
    with pytest.raises(DomainError):
        generate_block([])


def test_random_block_properties(rng):
    for n in (2, 4, 6):
        g = random_hermitian(n, rng)
        block = generate_block([g])
        total = sum(atom.data for atom in block.atoms)
        assert np.linalg.norm(total - np.eye(n), 2) <= TOL
        for i, a in enumerate(block.atoms):
            for b in block.atoms[i + 1:]:
                assert np.linalg.norm(a.data @ b.data, 2) <= TOL
        assert block.reconstruct(g).distance(g) <= TOL * (1 + g.norm)


def test_block_is_maximal(rng):
    g = random_hermitian(4, rng)
    block = generate_block([g])
    p = Projection(block.atoms[0].data + block.atoms[2].data)
    assert in_commutant(p, block.atoms)
    assert np.allclose(block.coordinates(p), [1.0, 0.0, 1.0, 0.0], atol=TOL)


def test_bicommutant(rng):
    basis = random_unitary(4, rng)
    g = from_spectrum([-0.7, -0.2, 0.4, 0.8], basis)
    h = from_spectrum(rng.uniform(-1, 1, 4), basis)
    resolution = full_resolution(g, grid_size=16, method=Method.ORACLE)
    assert all(commutes(bp.projection, h) for bp in resolution.breakpoints)
    assert commutes(g, h)


@pytest.mark.parametrize("method", [Method.ITERATIVE, Method.ORACLE])
def test_cblock_examples(method):
    g, h = HermitianMatrix.diag([1, 5]), HermitianMatrix.diag([3, 2])
    assert cblock_meet(g, h, method=method).distance(HermitianMatrix.diag([1, 2])) <= TOL
    assert cblock_join(g, h, method=method).distance(HermitianMatrix.diag([3, 5])) <= TOL
    assert cblock_meet(g, g, method=method).distance(g) <= TOL
    assert cblock_join(g, g, method=method).distance(g) <= TOL


def test_cblock_rejects_non_commuting(pauli_x, pauli_z):
    with pytest.raises(NotCommuting):
        cblock_meet(pauli_x, pauli_z)
    with pytest.raises(NotCommuting):
        cblock_join(pauli_x, pauli_z)


def test_cblock_lattice_laws(rng):
    for n in (2, 3, 4):
        basis = random_unitary(n, rng)
        a, b = grid_spectrum(n, rng), grid_spectrum(n, rng)
        g, h = from_spectrum(a, basis), from_spectrum(b, basis)
        meet, join = cblock_meet(g, h), cblock_join(g, h)
        assert meet.distance(from_spectrum(np.minimum(a, b), basis)) <= TOL
        assert join.distance(from_spectrum(np.maximum(a, b), basis)) <= TOL
        assert (meet + join).distance(g + h) <= TOL
        assert loewner_leq(meet, g) and loewner_leq(meet, h)
        assert loewner_leq(g, join) and loewner_leq(h, join)
        assert cblock_meet_by_comparability(g, h).distance(meet) <= TOL


def test_closure_examples(rng):
    assert verify_cblock_closure([HermitianMatrix.diag([1, 2])]).closed
    report = verify_cblock_closure([HermitianMatrix.identity(3)])
    assert report.closed and report.degenerate
    assert verify_cblock_closure([random_hermitian(4, rng)], method=Method.ORACLE).closed


def test_closure_of_commuting_family(rng):
    basis = random_unitary(3, rng)
    family = [from_spectrum(grid_spectrum(3, rng), basis) for _ in range(3)]
    report = verify_cblock_closure(family, method=Method.ORACLE)
    assert report.closed
    assert report.checked >= 3 * 4 + 3 * 3
    assert set(report.to_json()) == {"closed", "checked", "violations", "degenerate"}


def test_product_norm_is_submultiplicative(rng):
    basis = random_unitary(4, rng)
    g, h = from_spectrum(rng.uniform(-2, 2, 4), basis), from_spectrum(rng.uniform(-2, 2, 4), basis)
    product = HermitianMatrix(g.data @ h.data)
    assert one_norm(product) <= one_norm(g) * one_norm(h) + 1e-8


def test_ascending_sequence_supremum_commutes(rng):
    basis = random_unitary(3, rng)
    limit = rng.uniform(0.0, 1.0, 3)
    chain = [from_spectrum((1 - 2.0 ** -k) * limit, basis) for k in range(1, 30)]
    top = from_spectrum(limit, basis)
    for lower, upper in zip(chain, chain[1:]):
        assert loewner_leq(lower, upper)
    assert chain[-1].distance(top) <= 1e-8
    for member in chain:
        assert loewner_leq(member, top) and commutes(member, top)
