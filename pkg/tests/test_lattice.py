import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from central_mpo.lattice import (
    LatticeModel,
    build_toric_code,
    column_decomposition,
    effective_classical_hamiltonian,
    k_copy,
    random_commuting_model,
    regroup_columns,
    squash_cylinder,
    squash_sphere,
    toric_cylinder_generators,
    pauli_terms,
    validate,
    window_operator,
)
from central_mpo.stabilizer import stabilizer_zero_count
from central_mpo.verifier import brute_force_zero_count, eigen_zero_count

# zero-energy counts, frozen from the GF(2) stabilizer count and confirmed by dense traces
TORIC_COUNTS = [((4, 4, "tblr"), 1), ((4, 4, "tb"), 8), ((4, 4, ""), 128), ((3, 4, "tb"), 16), ((3, 3, ""), 32)]


@pytest.mark.parametrize("shape,count", TORIC_COUNTS)
def test_toric_counts_two_methods(shape, count):
    Lx, Ly, edges = shape
    m = build_toric_code(Lx, Ly, edges=edges, require_even=False)
    assert brute_force_zero_count(m, "stabilizer").count == count
    method = "dense" if m.total_dim() <= 4096 else "transfer"
    assert brute_force_zero_count(m, method).count == count


def test_toric_validates(toric4):
    rep = validate(toric4, 1e-12)
    assert rep["passed"] and rep["n_terms"] == 9


def test_one_term_per_plaquette(toric4):
    anchors = [t.anchor for t in toric4.terms]
    assert len(set(anchors)) == len(anchors)


def test_odd_sides_rejected_by_default():
    with pytest.raises(ValueError):
        build_toric_code(3)


def test_corrupted_model_fails_validation(toric4):
    bad = LatticeModel.from_dict(toric4.to_dict())
    bad.terms[0].P = bad.terms[0].P * 0.9
    rep = validate(bad)
    assert not rep["passed"] and rep["projector_residual"] > 1e-3


def test_json_round_trip(toric4):
    back = LatticeModel.from_dict(toric4.to_dict())
    assert back.to_dict() == toric4.to_dict()
    assert brute_force_zero_count(back).count == 1


@pytest.mark.parametrize("C", [0, 1, 2])
def test_window_operator_is_projector(toric4, C):
    W = window_operator(toric4, C)
    assert np.linalg.norm(W.matrix @ W.matrix - W.matrix) < 1e-10


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_random_models_commute_and_count(seed):
    m = random_commuting_model(2, 3, seed)
    assert validate(m, 1e-9)["passed"]
    assert brute_force_zero_count(m, "dense").count == eigen_zero_count(m)


def test_cylinder_fold_preserves_count():
    gens = toric_cylinder_generators(3, 4, edges="lr")
    cdims = {(x, y): 2 for x in range(3) for y in range(4)}
    direct = stabilizer_zero_count(gens, sorted(cdims))
    folded = squash_cylinder(3, 4, pauli_terms(gens, cdims), cdims)
    assert folded.Ly == 2 and set(folded.dims.values()) == {4}
    assert brute_force_zero_count(folded, "dense").count == direct


def test_sphere_has_unique_state():
    s = squash_sphere(3, 4)
    assert brute_force_zero_count(s, "dense").count == 1
    flipped = squash_sphere(3, 4, flips=["north"])
    assert brute_force_zero_count(flipped, "dense").count == 0


def test_k_copy_raises_count_to_power():
    m = build_toric_code(3, 2, edges="tb", require_even=False)
    n = brute_force_zero_count(m).count
    assert brute_force_zero_count(k_copy(m, 2), "dense").count == n ** 2


def test_regroup_columns_keeps_count():
    m = random_commuting_model(3, 2, 4)
    g = regroup_columns(m, [[0, 1], [2]])
    assert g.Lx == 2
    assert brute_force_zero_count(g, "dense").count == brute_force_zero_count(m, "dense").count


def test_effective_hamiltonian_minimum_is_zero_iff_count_positive():
    for seed in range(4):
        m = random_commuting_model(2, 2, seed)
        decs = [column_decomposition(m, C, "both", seed) for C in range(m.Lx)]
        eff = effective_classical_hamiltonian(m, decs)
        assert (eff.minimum() == 0.0) == (brute_force_zero_count(m).count > 0)
