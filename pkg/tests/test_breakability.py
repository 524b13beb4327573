import numpy as np
import pytest

from central_mpo.breakability import (
    HypothesisFailure,
    boundary_of,
    break_three,
    break_two,
    column_interval_witness,
    column_x_string,
    ext_int_factorization,
    frame_diagonal_operator,
    holes_split,
    obstruction_witness_toric,
    synthetic_factorizable_model,
    verify_interval_witness,
)
from central_mpo.lattice import LatticeModel, build_toric_code, plaquette_sites

HOLE = [(x, y) for x in range(2) for y in range(4)]


def test_boundary_geometry():
    m = LatticeModel.empty(10, 10, 2)
    ring = boundary_of(m, [(x, y) for x in range(2, 8) for y in range(2, 8)])
    assert (len(ring.B), len(ring.I)) == (20, 16)
    single = boundary_of(m, plaquette_sites(3, 3))
    assert (len(single.B), len(single.I)) == (4, 0)
    assert set(single.E).isdisjoint(single.S)


@pytest.mark.parametrize("seed", range(3))
def test_break_two_and_three(seed):
    rng = np.random.default_rng(seed)
    m = synthetic_factorizable_model(3, 4, [HOLE], seed)
    reg = boundary_of(m, HOLE)
    bf = ext_int_factorization(m, reg, seed)
    assert bf.ok and bf.residual < 1e-10
    X, Y, AI = [(2, 0)], [(2, 3)], [(0, 0), (0, 1), (0, 2)]
    A2 = X + [(1, 0)] + AI
    d2 = break_two(frame_diagonal_operator(m, A2, rng), reg.with_split(A=A2), m, bf)
    assert d2.reconstruction_residual < 1e-8 and d2.all_commuting()
    O = frame_diagonal_operator(m, X + Y + AI, rng)
    d3 = break_three(O, reg.with_split(A=X + Y + AI, X=X, Y=Y), m, factorization=bf)
    assert not isinstance(d3, HypothesisFailure), d3
    assert d3.reconstruction_residual < 1e-8
    assert d3.max_commutator() <= 1e-8 and d3.all_commuting()


def test_break_three_hypothesis_failures():
    m = synthetic_factorizable_model(3, 4, [HOLE], 0)
    reg = boundary_of(m, HOLE)
    O = frame_diagonal_operator(m, [(2, 0), (2, 1)], np.random.default_rng(0))
    overlap = break_three(O, reg.with_split(A=[(2, 0), (2, 1)], X=[(2, 0)], Y=[(2, 0)]), m)
    assert isinstance(overlap, HypothesisFailure) and "overlap" in overlap.reason
    close = break_three(O, reg.with_split(A=[(2, 0), (2, 1)], X=[(2, 0)], Y=[(2, 1)]), m)
    assert isinstance(close, HypothesisFailure) and "plaquette" in close.reason


def test_break_rejects_non_central_operator():
    from central_mpo.operators import pauli_operator
    m = synthetic_factorizable_model(3, 4, [HOLE], 1)
    reg = boundary_of(m, HOLE)
    O = pauli_operator({(2, 0): "Y", (2, 1): "X"})
    with pytest.raises(ValueError):
        break_two(O, reg.with_split(A=[(2, 0), (2, 1)]), m)


@pytest.mark.parametrize("L", [4, 6])
def test_column_string_obstruction(L):
    t = build_toric_code(L, edges="tblr")
    for C in range(1, L - 1):
        rep = obstruction_witness_toric(t, column_x_string(t, C))
        assert rep["obstruction"] and rep["method"] == "pauli"
        assert rep["T_residual"] == 0.0 and rep["commutator_T"] == 0.0
        assert rep["anticommutator_Tt"] == 0.0 and rep["anticommutator_Tb"] == 0.0


def test_obstruction_dense_path_agrees(toric4):
    from central_mpo.lattice import column_string
    ox = column_string(toric4, 1, "X")
    rep = obstruction_witness_toric(toric4, ox)
    assert rep["method"] == "dense" and rep["obstruction"]


def test_single_site_flip_fails_premise(toric4):
    rep = obstruction_witness_toric(toric4, {(0, 1): "X"})
    assert not rep["premise"] and not rep["obstruction"]


HOLE_CASES = [
    (4, 4, [[(x, y) for x in range(3) for y in range(3)]]),
    (6, 3, [[(x, y) for x in range(3) for y in range(3)], [(x, y) for x in range(3, 6) for y in range(3)]]),
    (4, 4, [[(0, 0), (1, 0), (0, 1), (1, 1)], [(2, 2), (3, 2), (2, 3), (3, 3)]]),
]


@pytest.mark.parametrize("seed", range(6))
def test_holes_equivalence(seed):
    Lx, Ly, holes = HOLE_CASES[seed % 3]
    m = synthetic_factorizable_model(Lx, Ly, holes, seed, frustrate=[0] if seed % 2 else [])
    rep = holes_split(m, holes, seed)
    assert rep.verdict in ("zero state", "no zero state")
    assert rep.equivalence_holds
    assert rep.coarse.zero_count() == rep.exterior_count
    if seed % 2:
        assert rep.verdict == "no zero state" and rep.hole_counts[0] == 0
    iw = column_interval_witness(m, holes, [1, Lx - 2] if Lx > 4 else [1], seed)
    assert iw.brute_count == rep.exterior_count
    if iw.witness is not None:
        assert verify_interval_witness(m, holes, iw).accepted


def test_toric_holes_obstructed():
    t = build_toric_code(6, edges="tblr")
    rep = holes_split(t, [plaquette_sites(1, 1), plaquette_sites(3, 3)])
    assert rep.verdict == "obstructed" and rep.obstructed == [0, 1]


def test_overlapping_holes_rejected():
    m = synthetic_factorizable_model(4, 4, [], 0)
    with pytest.raises(ValueError):
        holes_split(m, [plaquette_sites(0, 0), plaquette_sites(1, 1)])
