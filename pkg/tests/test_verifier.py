
import numpy as np
import pytest

from conftest import central_witnesses, desk_corpus
from central_mpo.lattice import column_decomposition, random_commuting_model
from central_mpo.mpo import MPO, column_mpo, compress
from central_mpo.verifier import (
    Witness,
    brute_force_zero_count,
    dense_witness_trace,
    identity_witness,
    is_mask,
    propagation_equivalence,
    toric_witness,
    verify_witness,
)


def test_toric_witness_accepted(toric4):
    w = toric_witness(toric4)
    assert all(b == 2 for bonds in w.bond_dims.values() for b in bonds)
    rep = verify_witness(toric4, w)
    assert rep.accepted, rep.reason
    assert rep.total == pytest.approx(1.0)


def test_constants_multiply_to_dense_trace(toric_strip):
    w = toric_witness(toric_strip)
    rep = verify_witness(toric_strip, w)
    assert rep.accepted
    assert rep.total == pytest.approx(dense_witness_trace(toric_strip, w), rel=1e-8)


def test_flipped_variant_rejected(toric4, toric4_flipped):
    rep = verify_witness(toric4_flipped, toric_witness(toric4_flipped))
    assert not rep.accepted
    assert rep.reason in ("zero trace",) or rep.reason.startswith("nonpositive constant")


def test_wrong_sign_witness_rejected(toric4):
    rep = verify_witness(toric4, toric_witness(toric4, signs=[1, -1, 1, 1]))
    assert not rep.accepted


def test_non_projector_rejected(toric4):
    w = toric_witness(toric4)
    w.entries[1] = w.entries[1] * 2.0
    rep = verify_witness(toric4, w)
    assert rep.verdict == "reject" and "not a projector" in rep.reason


def test_non_commuting_column_rejected(toric4):
    from central_mpo.lattice import column_string
    from central_mpo.operators import LocalOperator
    z = column_string(toric4, 1, "Z")
    one = LocalOperator.identity(z.support, z.dims)
    w = toric_witness(toric4)
    w.entries[1] = compress(column_mpo((one + z) * 0.5, toric4, 1))
    rep = verify_witness(toric4, w)
    assert not rep.accepted and "commute" in rep.reason


def test_decoupled_columns_bond_one_witness():
    from central_mpo.lattice import LatticeModel
    from central_mpo.operators import LocalOperator
    m = LatticeModel.empty(2, 2)
    P = np.zeros((16, 16))
    P[0, 0] = 1
    m.add_term(LocalOperator(((0, 0), (0, 1), (1, 0), (1, 1)), (2,) * 4, np.eye(16) - P))
    rep = verify_witness(m, identity_witness(m))
    assert rep.accepted and rep.total == pytest.approx(15)


def test_sparse_coverage_regrouped(toric4):
    full = toric_witness(toric4)
    sparse = Witness({C: full.entries[C] for C in (1, 3)}, [1, 3])
    rep = verify_witness(toric4, sparse)
    assert rep.verdict in ("accept", "reject")
    assert rep.accepted == (rep.total is not None and rep.total > 0)


@pytest.mark.parametrize("seed", range(6))
def test_propagation_equivalence(seed):
    m = random_commuting_model(2, 4, seed)
    assert max(propagation_equivalence(m, seed)) <= 1e-9


@pytest.mark.parametrize("seed", range(4))
def test_central_projectors_are_masks(seed):
    m = random_commuting_model(3, 2, seed)
    for p in column_decomposition(m, 1, "left", seed).projectors:
        rep = is_mask(p, m, 1, seed=seed)
        assert rep.is_mask and rep.exhaustive, rep.max_deviation


def test_generic_operator_is_not_a_mask():
    # a random column operator fails the trace identity unless the window is trivial
    failures = 0
    for seed in range(4):
        m = random_commuting_model(3, 2, seed)
        rng = np.random.default_rng(seed)
        o = MPO.from_dense(rng.standard_normal((4, 4)), [2, 2])
        failures += not is_mask(o, m, 1, seed=seed).is_mask
    assert failures >= 3


@pytest.mark.parametrize("name,model", desk_corpus(), ids=lambda v: v if isinstance(v, str) else "")
def test_soundness(name, model):
    count = brute_force_zero_count(model).count
    cands = [identity_witness(model), toric_witness(model), *central_witnesses(model)]
    accepted = 0
    for w in cands:
        rep = verify_witness(model, w)
        if rep.accepted:
            accepted += 1
            assert count >= 1, f"{name}: accepted with count 0"
            if model.total_dim() <= 4096:
                assert rep.total == pytest.approx(dense_witness_trace(model, w), rel=1e-8)
    if count == 0:
        assert accepted == 0
