import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from central_mpo.operators import (
    LocalOperator,
    commutator_residual,
    fuse_sites,
    operator_schmidt,
    partial_trace,
    pauli_operator,
    random_unitary,
)


def rand_op(sites, dims, seed):
    rng = np.random.default_rng(seed)
    d = int(np.prod(dims))
    return LocalOperator(sites, dims, rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))


def test_canonical_order_permutes_matrix():
    a = LocalOperator.from_factors({(1, 0): np.diag([1, 2]), (0, 0): np.diag([1, 3])}, {(0, 0): 2, (1, 0): 2})
    assert a.support == ((0, 0), (1, 0))
    assert np.allclose(np.diag(a.matrix), [1, 2, 3, 6])


def test_expand_tensors_identity():
    a = pauli_operator({(0, 0): "X"})
    b = a.expand([(0, 0), (0, 1)], [2, 2])
    assert np.allclose(b.matrix, np.kron([[0, 1], [1, 0]], np.eye(2)))


def test_rejects_bad_shapes():
    with pytest.raises(ValueError):
        LocalOperator(((0, 0),), (2,), np.eye(3))
    with pytest.raises(ValueError):
        LocalOperator(((0, 0), (0, 0)), (2, 2), np.eye(4))


def test_pauli_algebra():
    x, y, z = (pauli_operator({(0, 0): p}) for p in "XYZ")
    assert np.allclose((x @ y).matrix, 1j * z.matrix)
    assert commutator_residual(x, x) == 0.0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_partial_trace_of_product(seed):
    a = rand_op(((0, 0),), (2,), seed)
    b = rand_op(((0, 1),), (3,), seed + 1)
    ab = a @ b
    assert np.allclose(partial_trace(ab, [(0, 0)]).matrix, a.matrix * b.trace())


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_operator_schmidt_reconstructs(seed):
    op = rand_op(((0, 0), (0, 1), (1, 0)), (2, 2, 2), seed)
    left, right = operator_schmidt(op, [(0, 1)])
    total = None
    for a, b in zip(left, right):
        t = a @ b
        total = t if total is None else total + t
    assert np.allclose(total.matrix, op.matrix)
    gram = np.array([[np.vdot(x.matrix, y.matrix) for y in left] for x in left])
    assert np.allclose(gram, np.eye(len(left)))


def test_json_round_trip():
    op = rand_op(((0, 0), (2, 1)), (2, 3), 7)
    back = LocalOperator.from_dict(op.to_dict())
    assert back.support == op.support and np.allclose(back.matrix, op.matrix)


def test_fuse_sites_preserves_spectrum():
    op = rand_op(((0, 0), (1, 0)), (2, 2), 3)
    fused = fuse_sites(op, {("f",): [(0, 0), (1, 0)]}, {(0, 0): 2, (1, 0): 2})
    assert fused.dims == (4,)
    assert np.allclose(np.sort_complex(np.linalg.eigvals(fused.matrix)), np.sort_complex(np.linalg.eigvals(op.matrix)))


def test_random_unitary_is_unitary(rng):
    u = random_unitary(5, rng)
    assert np.allclose(u @ u.conj().T, np.eye(5))
