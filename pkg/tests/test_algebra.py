import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from central_mpo.algebra import (
    FactorizationObstruction,
    TensorFactorization,
    algebra_from_arrays,
    center,
    commutant,
    full_algebra,
    generate_algebra,
    interaction_algebra,
    interaction_algebra_sweep,
    matrix_units,
    minimal_central_projectors,
    tensor_factorize,
)
from central_mpo.operators import LocalOperator, pauli_operator, random_unitary

A, B, C = (0, 0), (0, 1), (0, 2)
DIMS = {A: 2, B: 2, C: 2}


def structure_ok(alg, tol=1e-9):
    return max(alg.closure_residual(), alg.star_residual(), alg.orthonormality_residual()) <= tol


def test_algebra_of_zz_is_two_dimensional():
    alg = generate_algebra([pauli_operator({A: "Z", B: "Z"})], [A, B])
    assert alg.dim == 2 and structure_ok(alg)


def test_paulis_generate_full_matrix_algebra():
    alg = generate_algebra([pauli_operator({A: "X"}), pauli_operator({A: "Z"})], [A])
    assert alg.dim == 4 and structure_ok(alg)


def test_interaction_algebra_of_xx_projector():
    P = (LocalOperator.identity((A, B), (2, 2)) + pauli_operator({A: "X", B: "X"})) * 0.5
    ia = interaction_algebra(P, [A])
    assert ia.dim == 2
    assert ia.residual(pauli_operator({A: "X"})) < 1e-12


def test_interaction_algebra_outside_support_is_trivial():
    ia = interaction_algebra(pauli_operator({A: "X"}), [C], DIMS)
    assert ia.dim == 1 and ia.trivial


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_schmidt_route_matches_complement_sweep(seed):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    op = LocalOperator((A, B, C), (2, 2, 2), m @ m.conj().T * (rng.random() < 0.5) + np.diag(rng.random(8) < 0.5))
    fast = interaction_algebra(op, [A, B])
    slow = interaction_algebra_sweep([op], [A, B])
    assert fast.dim == slow.dim
    assert max(slow.residual(b) for b in fast.basis) < 1e-8


def test_commutant_of_left_factor_is_right_factor():
    alg = generate_algebra([pauli_operator({A: "X"}), pauli_operator({A: "Z"})], [A, B], DIMS)
    com = commutant(alg)
    assert com.dim == 4
    assert com.residual(pauli_operator({B: "Y"}).expand([A, B], [2, 2])) < 1e-10


def test_double_commutant_recovers_algebra():
    alg = generate_algebra([pauli_operator({A: "Z", B: "Z"}), pauli_operator({A: "X"})], [A, B])
    back = commutant(commutant(alg))
    assert back.dim == alg.dim
    assert max(alg.residual(b) for b in back.basis) < 1e-8


def test_gram_null_space_matches_stacked_commutators():
    from central_mpo.algebra import _gram_null_space, _null_space
    alg = generate_algebra([pauli_operator({A: "Z", B: "Z"}), pauli_operator({B: "X"})], [A, B])
    gens = alg.gens()
    I = np.eye(4)
    M = np.concatenate([np.kron(I, g.T) - np.kron(g, I) for g in gens])
    direct = _null_space(M, 1e-9)
    gram = _gram_null_space(gens, 4, 1e-9)
    assert direct.shape == gram.shape
    # same subspace: projectors agree
    assert np.allclose(direct @ direct.conj().T, gram @ gram.conj().T, atol=1e-8)


def block_algebra():
    # M_2 (+) C (+) C on C^4, in a random frame
    rng = np.random.default_rng(5)
    u = random_unitary(4, rng)
    mats = []
    for i in range(2):
        for j in range(2):
            e = np.zeros((4, 4))
            e[i, j] = 1
            mats.append(e)
    for k in (2, 3):
        e = np.zeros((4, 4))
        e[k, k] = 1
        mats.append(e)
    return algebra_from_arrays(np.array([u @ m @ u.conj().T for m in mats]), [A, B], (2, 2)), u


def test_center_and_minimal_projectors():
    alg, u = block_algebra()
    assert alg.dim == 6 and center(alg).dim == 3
    dec = minimal_central_projectors(alg, seed=3)
    assert dec.block_dims == [2, 1, 1]
    P = dec.matrices()
    assert np.allclose(sum(P), np.eye(4))
    for i, p in enumerate(P):
        assert np.allclose(p @ p, p)
        for q in P[i + 1:]:
            assert np.allclose(p @ q, 0)


def test_matrix_units_relations():
    alg, _ = block_algebra()
    P = minimal_central_projectors(alg).matrices()[0]
    units, mult = matrix_units(alg, P)
    assert len(units) == 2 and mult == 1
    e11, e21 = units
    assert np.allclose(e21.conj().T @ e21, e11)
    assert np.allclose(e21 @ e21.conj().T + e11, P)


def test_tensor_factorize_two_qubits():
    left = generate_algebra([pauli_operator({A: "X"}), pauli_operator({A: "Z"})], [A, B], DIMS)
    fact = tensor_factorize(left, commutant(left))
    assert isinstance(fact, TensorFactorization) and tuple(fact.dims) == (2, 2)
    assert np.allclose(fact.iso.conj().T @ fact.iso, np.eye(4))


def test_tensor_factorize_reports_shared_center():
    zz = generate_algebra([pauli_operator({A: "Z", B: "Z"})], [A, B])
    out = tensor_factorize(zz, zz)
    assert isinstance(out, FactorizationObstruction)
    assert out.joint_center_dim == 2


@pytest.mark.parametrize("d", [1, 2, 3])
def test_full_algebra_has_trivial_center(d):
    alg = full_algebra([A], [d])
    assert center(alg).dim == 1
