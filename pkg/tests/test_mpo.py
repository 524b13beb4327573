import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from central_mpo.lattice import column_string, random_commuting_model, window_operator
from central_mpo.mpo import (
    MPO,
    add,
    column_mpo,
    compress,
    dense_propagate,
    embed_in_window,
    inner,
    multiply,
    propagate,
    proportionality,
    window_mpo,
    window_to_local,
)
from central_mpo.operators import LocalOperator, ResourceError


def rand_mpo(rng, phys, bond):
    n = len(phys)
    bonds = [1] + [bond] * (n - 1) + [1]
    return MPO([rng.standard_normal((bonds[k], bonds[k + 1], p, p)) + 1j * rng.standard_normal((bonds[k], bonds[k + 1], p, p))
                for k, p in enumerate(phys)])


def dense(rng, d):
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.lists(st.integers(2, 3), min_size=1, max_size=4))
def test_dense_round_trip(seed, phys):
    rng = np.random.default_rng(seed)
    m = dense(rng, int(np.prod(phys)))
    assert np.allclose(MPO.from_dense(m, phys).to_dense(), m)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_arithmetic_matches_dense(seed):
    rng = np.random.default_rng(seed)
    a, b = rand_mpo(rng, [2, 3, 2], 2), rand_mpo(rng, [2, 3, 2], 3)
    A, B = a.to_dense(), b.to_dense()
    assert np.allclose(multiply(a, b).to_dense(), A @ B)
    assert np.allclose(add(a, b).to_dense(), A + B)
    assert np.allclose((a * 2.5).to_dense(), 2.5 * A)
    assert np.isclose(inner(a, b), np.vdot(A, B))
    assert np.isclose(a.trace(), np.trace(A))
    assert np.isclose(a.norm(), np.linalg.norm(A))
    assert np.allclose(a.dag().to_dense(), A.conj().T)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_compress_is_lossless_and_reduces_bond(seed):
    rng = np.random.default_rng(seed)
    a = rand_mpo(rng, [2, 2, 2, 2], 2)
    doubled = add(a, a)  # bond 4, rank 2
    c = compress(doubled)
    assert c.max_bond <= 2
    assert np.allclose(c.to_dense(), 2 * a.to_dense())


def test_bond_dimension_of_product_operator():
    x = np.array([[0, 1], [1, 0]])
    m = MPO.from_dense(np.kron(np.kron(x, x), x), [2, 2, 2])
    assert m.bond_dims == [1, 1]
    ident_plus = MPO.from_dense(np.eye(8) + np.kron(np.kron(x, x), x), [2, 2, 2])
    assert ident_plus.bond_dims == [2, 2]


def test_periodic_to_open_and_dense():
    rng = np.random.default_rng(0)
    ts = [rng.standard_normal((2, 2, 2, 2)) for _ in range(3)]
    per = MPO(ts, periodic=True)
    ref = np.einsum("abij,bckl,camn->ikmjln", *ts).reshape(8, 8)
    assert np.allclose(per.to_dense(), ref)
    assert np.allclose(per.to_open().to_dense(), ref)


def test_proportionality():
    rng = np.random.default_rng(1)
    a = rand_mpo(rng, [2, 2], 2)
    pr = proportionality(a * (2 - 1j), a)
    assert pr.proportional and np.isclose(pr.x, 2 - 1j)
    assert not proportionality(a, rand_mpo(rng, [2, 2], 2)).proportional
    zero = a * 0
    assert proportionality(zero, zero).degenerate


def test_json_round_trip():
    rng = np.random.default_rng(2)
    a = rand_mpo(rng, [2, 3], 2)
    b = MPO.from_dict(a.to_dict())
    assert np.allclose(a.to_dense(), b.to_dense())


def test_bad_bonds_rejected():
    with pytest.raises(ValueError):
        MPO([np.zeros((1, 2, 2, 2)), np.zeros((3, 1, 2, 2))])
    with pytest.raises(ValueError):
        MPO([np.zeros((2, 1, 2, 2))])


def test_dense_cap(monkeypatch):
    import central_mpo.mpo as mod
    a = MPO.identity([2] * 3)
    with pytest.raises(ResourceError):
        a.to_dense(cap=4)
    monkeypatch.setattr(mod, "DENSE_CAP", 4)
    with pytest.raises(ResourceError):
        MPO.from_dense(np.eye(8), [2, 2, 2])


@pytest.mark.parametrize("seed", range(4))
def test_window_mpo_matches_dense(seed):
    m = random_commuting_model(3, 3, seed)
    for C in range(2):
        W = window_mpo(m, C)
        ref = window_operator(m, C)
        got = window_to_local(W, m, C, C + 1)
        assert np.allclose(got.matrix, ref.matrix)


@pytest.mark.parametrize("seed", range(4))
def test_propagate_matches_dense(seed):
    m = random_commuting_model(3, 2, seed)
    rng = np.random.default_rng(seed)
    col = m.column(0)
    rho = LocalOperator(col, m.column_dims(0), dense(rng, 4))
    got = propagate(column_mpo(rho, m, 0), window_mpo(m, 0))
    ref = dense_propagate(rho, window_operator(m, 0), m.column(1))
    assert np.allclose(got.to_dense(), ref.matrix)


def test_embed_in_window_acts_on_one_factor(toric_strip):
    W = window_mpo(toric_strip, 0)
    x = column_mpo(column_string(toric_strip, 1, "X"), toric_strip, 1)
    E = embed_in_window(x, W, 1)
    ref = column_string(toric_strip, 1, "X").expand(toric_strip.columns(0, 1), toric_strip.dims)
    assert np.allclose(window_to_local(E, toric_strip, 0, 1).matrix, ref.matrix)
