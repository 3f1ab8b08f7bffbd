import numpy as np
import pytest

from constructive_calculus import absolute
from errors import DimensionMismatch, DomainError
from hermitian_core import HermitianMatrix, compress, loewner_leq
from states_norms import (
    VectorState,
    evaluate,
    eigenvector_states,
    one_norm,
    order_determined,
    random_state,
    state_range,
)
from utils import (
    from_spectrum,
    random_hermitian,
    random_positive,
    random_projection,
    random_signed_spectrum,
    random_unitary,
)


def test_evaluate_examples(rng, pauli_x):
    assert evaluate(random_state(3, rng), HermitianMatrix.identity(3)) == pytest.approx(1.0, abs=1e-14)
    assert evaluate(VectorState.basis(2, 0), HermitianMatrix.diag([0.3, 0.8])) == 0.3
    assert evaluate(VectorState.from_amplitudes([1, 1]), pauli_x) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(DimensionMismatch):
        evaluate(VectorState.basis(2, 0), HermitianMatrix.identity(3))


def test_states_must_be_unit_vectors():
    with pytest.raises(DomainError):
        VectorState(np.array([1.0, 1.0]))
    state = VectorState.from_amplitudes([3, 4j])
    assert np.linalg.norm(state.psi) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        state.psi[0] = 0.0


def test_one_norm_examples():
    assert one_norm(HermitianMatrix.identity(3)) == 1.0
    assert one_norm(HermitianMatrix.diag([-3, 2])) == pytest.approx(3.0, abs=1e-8)
    assert one_norm(HermitianMatrix([[2, 1], [1, 2]])) == pytest.approx(3.0, abs=1e-8)
    assert one_norm(HermitianMatrix.zeros(2)) == 0.0


def test_state_range_examples():
    assert state_range(HermitianMatrix.diag([0, 1]), samples=20, seed=3) == pytest.approx((0.0, 1.0), abs=1e-12)
    assert state_range(HermitianMatrix.scalar(1.5, 3), samples=5, seed=3) == pytest.approx((1.5, 1.5), abs=1e-12)
    with pytest.raises(DomainError):
        state_range(HermitianMatrix.identity(2), samples=0)


def test_state_range_matches_spectrum(rng):
    g = random_hermitian(3, rng)
    low, high = state_range(g, samples=50, seed=11)
    lam = g.eigen.eigenvalues
    assert low == pytest.approx(lam[0], abs=1e-9) and high == pytest.approx(lam[-1], abs=1e-9)


def test_state_range_is_deterministic(rng):
    g = random_hermitian(4, rng)
    assert state_range(g, samples=10, seed=5) == state_range(g, samples=10, seed=5)


def test_norm_identities(rng):
    for n in (2, 3, 5):
        g = random_hermitian(n, rng, spectrum=random_signed_spectrum(n, rng))
        scale = 1e-8 * (1 + g.norm) ** 2
        assert one_norm(g.square()) == pytest.approx(one_norm(g) ** 2, abs=scale)
        assert one_norm(absolute(g)) == pytest.approx(one_norm(g), abs=scale)
        assert one_norm(g) == pytest.approx(g.norm, abs=scale)
        p = random_projection(n, rng, rank=1)
        assert one_norm(p) == pytest.approx(1.0, abs=1e-8)
        assert one_norm(compress(p, g)) <= one_norm(g) + scale


def test_unit_ball_is_squares_below_one(rng):
    one = HermitianMatrix.identity(3)
    for radius in (0.5, 0.99, 1.5):
        g = random_hermitian(3, rng, spectrum=radius * np.array([-1.0, 0.2, 1.0]))
        inside = loewner_leq(-one, g) and loewner_leq(g, one)
        assert inside == loewner_leq(g.square(), one)
        assert inside == (radius <= 1.0)


def test_sums_of_weighted_elements(rng):
    weights = rng.uniform(0.0, 1.0, 4)
    members = [random_hermitian(3, rng) for _ in weights]
    total = sum((w * m for w, m in zip(weights, members)), HermitianMatrix.zeros(3))
    assert one_norm(total) <= sum(w * one_norm(m) for w, m in zip(weights, members)) + 1e-8


def test_weighted_sum_of_positive_elements(rng):
    for bound in (0.3, 1.0, 2.5):
        members = [random_positive(3, rng) for _ in range(4)]
        weights = rng.uniform(0.0, bound, len(members))
        weighted = sum((w * m for w, m in zip(weights, members)), HermitianMatrix.zeros(3))
        plain = sum(members, HermitianMatrix.zeros(3))
        assert one_norm(weighted) <= bound * one_norm(plain) + 1e-8


def test_norm_is_monotone_between_minus_h_and_h(rng):
    basis = random_unitary(3, rng)
    for _ in range(5):
        upper = rng.uniform(0.1, 1.0, 3)
        h = from_spectrum(upper, basis)
        g = from_spectrum(upper * rng.uniform(-1.0, 1.0, 3), basis)
        assert loewner_leq(-h, g) and loewner_leq(g, h)
        assert one_norm(g) <= one_norm(h) + 1e-8
    h = random_positive(3, rng)
    for factor in (-1.0, -0.4, 0.0, 0.7, 1.0):
        g = h * factor
        assert loewner_leq(-h, g) and loewner_leq(g, h)
        assert one_norm(g) <= one_norm(h) + 1e-8
    # g need not commute with h
    h = HermitianMatrix.identity(2)
    g = HermitianMatrix(np.array([[0.3, 0.5j], [-0.5j, -0.2]]))
    assert loewner_leq(-h, g) and loewner_leq(g, h)
    assert one_norm(g) <= one_norm(h) + 1e-8


def test_order_is_determined_by_states(rng):
    for _ in range(5):
        g = random_hermitian(3, rng)
        above = g + random_positive(3, rng)
        other = random_hermitian(3, rng)
        assert order_determined(g, above) and loewner_leq(g, above)
        assert order_determined(g, other) == loewner_leq(g, other)
        assert not order_determined(above, g)


def test_states_converge_with_elements(rng):
    g = random_hermitian(3, rng)
    state = random_state(3, rng)
    values = [evaluate(state, (1 - 2.0 ** -m) * g) for m in range(1, 40)]
    assert abs(values[-1] - evaluate(state, g)) <= 1e-10
    gaps = [abs(v - evaluate(state, g)) for v in values]
    assert all(later <= earlier + 1e-15 for earlier, later in zip(gaps, gaps[1:]))


def test_eigenvector_states_attain_the_bounds():
    states = eigenvector_states(HermitianMatrix.diag([2, -1, 0.5]))
    values = sorted(evaluate(s, HermitianMatrix.diag([2, -1, 0.5])) for s in states)
    assert values == pytest.approx([-1.0, 0.5, 2.0])
