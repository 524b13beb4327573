import itertools

import numpy as np
import pytest

from central_mpo.lattice import build_toric_code

EDGE_FLIP = [((0, 0), (1, 0))]


@pytest.fixture(scope="session")
def toric4():
    return build_toric_code(4, edges="tblr")


@pytest.fixture(scope="session")
def toric4_flipped():
    return build_toric_code(4, edges="tblr", flips=EDGE_FLIP)


@pytest.fixture(scope="session")
def toric_strip():
    return build_toric_code(3, 4, edges="tb", require_even=False)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def desk_corpus():
    """Every desk-scale instance used by the soundness sweep, as (name, model)."""
    from central_mpo.breakability import synthetic_factorizable_model
    from central_mpo.lattice import random_commuting_model

    out = []
    for Lx, Ly, edges in ((4, 4, "tblr"), (4, 4, "tb"), (3, 4, "tb"), (3, 3, ""), (2, 2, "tb")):
        out.append((f"toric{Lx}x{Ly}{edges}", build_toric_code(Lx, Ly, edges=edges, require_even=False)))
        out.append((f"toric{Lx}x{Ly}{edges}-flip", build_toric_code(Lx, Ly, edges=edges, flips=EDGE_FLIP, require_even=False)))
        out.append((f"toric{Lx}x{Ly}{edges}-pflip", build_toric_code(Lx, Ly, edges=edges, flips=[(0, 0)], require_even=False)))
    for shape in ((2, 2), (2, 3), (3, 2), (3, 3)):
        for seed in range(6):
            out.append((f"random{shape}-{seed}", random_commuting_model(*shape, seed)))
    hole = [(0, 0), (1, 0), (0, 1), (1, 1)]
    for seed in range(4):
        out.append((f"synthetic-{seed}", synthetic_factorizable_model(3, 3, [hole], seed, frustrate=[0] if seed % 2 else [])))
    return out


def central_witnesses(model, limit=64):
    """All witnesses assembling one minimal central projector per column."""
    from central_mpo.lattice import column_decomposition
    from central_mpo.mpo import MPO, column_mpo
    from central_mpo.verifier import Witness

    options = [[MPO.identity(list(model.column_dims(0)))]]
    for C in range(1, model.Lx):
        options.append([column_mpo(p, model, C) for p in column_decomposition(model, C, "left").projectors])
    for pick in itertools.islice(itertools.product(*options), limit):
        yield Witness(dict(enumerate(pick)))
