"""Four-site problems (sites 1, 2, X, 3), boundary algebras, dimension
bounds and the split of a central column operator into an MPO part and a
part annihilated by the column window.

A four-site problem groups lattice sites into four blocks.  ``Q12X`` and
``Q2X3`` are commuting positive operators kept on their own (lattice) support;
blocks that an operator does not touch enter as identity factors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import (
    OperatorAlgebra,
    _orthonormalize,
    _range_basis,
    algebra_from_arrays,
    center,
    commutant,
    full_algebra,
    generate_algebra,
    interaction_algebra,
    matrix_units,
    minimal_central_projectors,
    tensor_factorize,
    TensorFactorization,
)
from .lattice import LatticeModel, column_decomposition, column_interaction_algebra
from .mpo import MPO, column_mpo, compress, embed_in_window, multiply, window_mpo
from .operators import (
    DENSE_CAP,
    LocalOperator,
    ResourceError,
    canonical_sites,
    commutator,
    partial_trace,
    random_unitary,
)
from .verifier import Witness, brute_force_zero_count, verify_witness

GROUPS = ("1", "2", "X", "3")
ZERO_TOL = 1e-9
RANK_TOL = 1e-9
ALG2X_CAP = 64  # largest 2X dimension for which the joint algebra is built


class BoundViolation(RuntimeError):
    """A dimension bound failed although its hypotheses were verified."""


# problems -----------------------------------------------------------------

@dataclass(eq=False)
class FourSiteProblem:
    groups: dict  # "1" | "2" | "X" | "3" -> tuple of underlying sites
    dims: dict  # underlying site -> dimension
    Q12X: LocalOperator
    Q2X3: LocalOperator
    weights: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def group_dim(self, g: str) -> int:
        return int(np.prod([self.dims[s] for s in self.groups[g]])) if self.groups[g] else 1

    @property
    def shape(self) -> tuple:
        return tuple(self.group_dim(g) for g in GROUPS)

    def sites(self, *names) -> tuple:
        return canonical_sites(s for g in names for s in self.groups[g])

    def sub_dims(self, sites) -> dict:
        return {s: self.dims[s] for s in sites}

    def validate(self, tol: float = 1e-8) -> dict:
        both = canonical_sites(self.Q12X.support + self.Q2X3.support)
        a = self.Q12X.expand(both, self.sub_dims(both))
        b = self.Q2X3.expand(both, self.sub_dims(both))
        comm = commutator(a, b).norm()
        mins = [float(np.linalg.eigvalsh(q.matrix).min()) if q.dim else 0.0 for q in (self.Q12X, self.Q2X3)]
        return {"commutator": float(comm), "min_eigenvalues": mins,
                "ok": comm <= tol and min(mins) >= -ZERO_TOL}

    def to_dict(self) -> dict:
        return {"groups": {g: [list(s) if isinstance(s, tuple) else s for s in v] for g, v in self.groups.items()},
                "shape": list(self.shape),
                "weights": {str(k): v for k, v in self.weights.items()},
                "provenance": self.provenance}


def _kernel(op: LocalOperator, tol: float = ZERO_TOL) -> np.ndarray:
    w, v = np.linalg.eigh((op.matrix + op.matrix.conj().T) / 2)
    scale = max(1.0, float(np.abs(w).max()) if len(w) else 1.0)
    return v[:, w <= tol * scale]


def _projector(vecs: np.ndarray) -> np.ndarray:
    return vecs @ vecs.conj().T


def _rank(mat: np.ndarray, tol: float = RANK_TOL) -> int:
    s = np.linalg.svd(mat, compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0] if len(s) else 0.0)))


# boundary algebra ---------------------------------------------------------

@dataclass(eq=False)
class Block:
    algebra: OperatorAlgebra
    projector: LocalOperator
    annihilates_ground: bool
    size: int  # n with the block isomorphic to M_n
    effective: list = field(default_factory=list)  # X matrices of the block basis


@dataclass(eq=False)
class BoundaryAlgebraResult:
    problem: FourSiteProblem
    blocks: list
    boundary_algebra_dim: int
    ground_basis: np.ndarray | None  # columns on ``ground_support``
    ground_support: tuple
    empty_ground: bool = False
    algebra: OperatorAlgebra | None = None

    @property
    def kept(self) -> list:
        return [b for b in self.blocks if not b.annihilates_ground]

    def unit(self) -> LocalOperator:
        """``1_BA``: sum of the kept block projectors (on sites 2 and 3)."""
        sites = self.problem.sites("2", "3")
        out = LocalOperator(sites, tuple(self.problem.dims[s] for s in sites),
                            np.zeros((self.problem.group_dim("2") * self.problem.group_dim("3"),) * 2, dtype=complex))
        for b in self.kept:
            out = out + b.projector
        return out

    def to_dict(self) -> dict:
        return {"D_BA": self.boundary_algebra_dim,
                "empty_ground": self.empty_ground,
                "blocks": [{"dim": b.algebra.dim, "size": b.size, "rank": int(round(np.trace(b.projector.matrix).real)),
                            "annihilates_ground": b.annihilates_ground} for b in self.blocks],
                "ground_dim": 0 if self.ground_basis is None else int(self.ground_basis.shape[1])}


def _ground(p: FourSiteProblem):
    """Zero eigenspace of ``Q2X3`` on its support joined with sites 2 and 3."""
    support = canonical_sites(p.Q2X3.support + p.sites("2", "3"))
    q = p.Q2X3.expand(support, p.sub_dims(support))
    if q.dim > DENSE_CAP:
        raise ResourceError(f"Q2X3 of dimension {q.dim} exceeds cap {DENSE_CAP}")
    return support, _kernel(q)


def boundary_algebra(p: FourSiteProblem, seed: int = 0) -> BoundaryAlgebraResult:
    s2, s3, s23 = p.sites("2"), p.sites("3"), p.sites("2", "3")
    d23 = p.group_dim("2") * p.group_dim("3")
    if d23 * d23 > DENSE_CAP * 16:
        raise ResourceError(f"boundary algebra on dimension {d23} exceeds cap")
    dims23 = p.sub_dims(s23)
    ia3 = interaction_algebra([p.Q2X3], s3, p.sub_dims(s3))
    ia23 = interaction_algebra([p.Q2X3], s23, dims23)
    # full algebra on site 2 times the site-3 interaction algebra, on (2, 3)
    f2 = full_algebra(s2, [p.dims[s] for s in s2])
    mats = []
    for a in f2.elements():
        for b in ia3.elements():
            mats.append((a.expand(s23, dims23) @ b.expand(s23, dims23)).matrix)
    gen = OperatorAlgebra(s23, tuple(dims23[s] for s in s23),
                          _orthonormalize(np.array(mats).reshape(len(mats), -1)).reshape(-1, d23, d23))
    ba = commutant(ia23, within=gen)
    dec = minimal_central_projectors(ba, seed)
    support, kern = _ground(p)
    empty = kern.shape[1] == 0
    blocks = []
    for proj in dec.projectors:
        sub = ba.restrict(proj.matrix)
        n = int(round(np.sqrt(sub.dim)))
        if empty:
            ann = True
        else:
            big = proj.expand(support, p.sub_dims(support)).matrix
            ann = float(np.linalg.norm(big @ kern)) <= 1e-8
        blk = Block(sub, proj, ann, n)
        if not ann:
            blk.effective = [_effective(LocalOperator(s23, proj.dims, m), kern, support, p) for m in sub.basis]
        blocks.append(blk)
    D = sum(b.algebra.dim for b in blocks if not b.annihilates_ground)
    return BoundaryAlgebraResult(p, blocks, D, None if empty else kern, support, empty, ba)


def _effective(op: LocalOperator, kern: np.ndarray, support: tuple, p: FourSiteProblem) -> np.ndarray:
    big = op.expand(support, p.sub_dims(support)).matrix
    return kern.conj().T @ big @ kern


def effective_iso_check(r: BoundaryAlgebraResult, tol: float = 1e-8) -> dict:
    """Per kept block: the map ``O -> X`` keeps dimension and is multiplicative."""
    out = {"blocks": [], "excluded": [], "ok": True}
    p = r.problem
    s23 = p.sites("2", "3")
    for k, b in enumerate(r.blocks):
        if b.annihilates_ground:
            out["excluded"].append(k)
            continue
        X = np.array(b.effective)
        rank = _rank(X.reshape(len(X), -1), 1e-8)
        worst = 0.0
        invariance = 0.0
        big_support = r.ground_support
        for i, oi in enumerate(b.algebra.basis):
            Oi = LocalOperator(s23, b.projector.dims, oi)
            big = Oi.expand(big_support, p.sub_dims(big_support)).matrix
            # O maps the ground space into itself
            invariance = max(invariance, float(np.linalg.norm(big @ r.ground_basis - r.ground_basis @ X[i])))
            for j, oj in enumerate(b.algebra.basis):
                prod = _effective(LocalOperator(s23, b.projector.dims, oi @ oj), r.ground_basis, big_support, p)
                worst = max(worst, float(np.linalg.norm(prod - X[i] @ X[j])))
        ok = rank == b.algebra.dim and worst <= tol and invariance <= tol
        out["blocks"].append({"block": k, "dim": b.algebra.dim, "image_dim": rank,
                              "multiplicative_residual": worst, "invariance_residual": invariance, "ok": ok})
        out["ok"] = out["ok"] and ok
    return out


# bounds -------------------------------------------------------------------

def _total_zero_dim(p: FourSiteProblem) -> int:
    sites = p.sites(*GROUPS)
    dims = p.sub_dims(sites)
    d = int(np.prod(list(dims.values())))
    if d > DENSE_CAP:
        raise ResourceError(f"four-site dimension {d} exceeds cap {DENSE_CAP}")
    H = p.Q12X.expand(sites, dims) + p.Q2X3.expand(sites, dims)
    return int(_kernel(H).shape[1])


def _reduced_site3(p: FourSiteProblem, kern: np.ndarray, support: tuple) -> np.ndarray:
    """Reduced density matrix of the Q2X3 ground projector on the site-3 block."""
    P0 = LocalOperator(support, tuple(p.dims[s] for s in support), _projector(kern))
    return partial_trace(P0, p.sites("3")).matrix


def _alpha_zero(p: FourSiteProblem, kern: np.ndarray, support: tuple, seed: int):
    """Central projector of the joint 2X algebra holding every Q2X3 zero state.

    Returns ``(projector_on_2X, joint_algebra, ia12, ia23)`` or raises
    ResourceError when the 2X space is too large.
    """
    s2x = p.sites("2", "X")
    dims = p.sub_dims(s2x)
    d = int(np.prod(list(dims.values())))
    if d > ALG2X_CAP:
        raise ResourceError(f"joint algebra on 2X of dimension {d} exceeds cap {ALG2X_CAP}")
    a12 = interaction_algebra([p.Q12X], s2x, dims)
    a23 = interaction_algebra([p.Q2X3], s2x, dims)
    joint = generate_algebra([LocalOperator(s2x, a12.dims, g) for g in np.concatenate([a12.basis, a23.basis])],
                             s2x, dims)
    dec = minimal_central_projectors(joint, seed)
    full = canonical_sites(support + s2x)
    G = LocalOperator(support, tuple(p.dims[s] for s in support), _projector(kern)).expand(full, p.sub_dims(full))
    for proj in dec.projectors:
        big = proj.expand(full, p.sub_dims(full)).matrix
        if np.linalg.norm(big @ G.matrix - G.matrix) <= 1e-8:
            return proj, a12, a23
    return None, a12, a23


def _factored_hypotheses(p: FourSiteProblem, seed: int) -> dict:
    """Mechanical check of the unique-state, alpha=0 and factored-uniqueness clauses."""
    hyp = {"unique_ground_state": None, "alpha_zero": None, "factorizes": None, "unique_factored_zero": None}
    detail = {}
    support, kern = _ground(p)
    try:
        hyp["unique_ground_state"] = _total_zero_dim(p) == 1
        P0, a12, a23 = _alpha_zero(p, kern, support, seed)
    except ResourceError as exc:
        detail["unverifiable"] = str(exc)
        return {"hypotheses": hyp, "detail": detail, "kernel": kern, "support": support}
    hyp["alpha_zero"] = P0 is not None
    if P0 is None:
        return {"hypotheses": hyp, "detail": detail, "kernel": kern, "support": support}
    rng_basis = _range_basis(P0.matrix)
    r = rng_basis.shape[1]
    dims_r = (r,)

    def restricted(alg):
        mats = np.einsum("ia,kij,jb->kab", rng_basis.conj(), alg.basis, rng_basis)
        return algebra_from_arrays(mats, ("r",), dims_r)

    fact = tensor_factorize(restricted(a12), restricted(a23), seed)
    hyp["factorizes"] = isinstance(fact, TensorFactorization)
    if not hyp["factorizes"]:
        return {"hypotheses": hyp, "detail": detail, "kernel": kern, "support": support}
    d_to1 = fact.dims[0]
    detail["dims_2X"] = [int(x) for x in fact.dims]
    # Q2X3 zero space inside range(P0) has dimension d_{2X->1} times that on the factored space
    full = canonical_sites(support + P0.support)
    G = LocalOperator(support, tuple(p.dims[s] for s in support), _projector(kern)).expand(full, p.sub_dims(full))
    big = P0.expand(full, p.sub_dims(full)).matrix
    # zero states of Q2X3 in the block, divided by the identity padding on unused X sites
    pad = int(np.prod([p.dims[s] for s in full if s not in support]))
    inside = _rank(big @ G.matrix, 1e-8) // pad
    hyp["unique_factored_zero"] = bool(inside == d_to1)
    detail["zero_dim_in_block"] = int(inside)
    return {"hypotheses": hyp, "detail": detail, "kernel": kern, "support": support}


def _minimal_projectors(block: Block, samples: int, rng) -> list:
    """Diagonal matrix units of a block plus seeded random rank-one projectors."""
    units, _ = matrix_units(block.algebra, block.projector.matrix)
    out = [u if k == 0 else u @ units[0] @ u.conj().T for k, u in enumerate(units)]
    n = len(units)
    for _ in range(samples if n > 1 else 0):
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v /= np.linalg.norm(v)
        # rank-one in the M_n factor: sum_ij v_i v_j* E_i1 E_1j
        m = sum(v[i] * np.conj(v[j]) * units[i] @ units[j].conj().T for i in range(n) for j in range(n))
        out.append(m)
    return out


def _full_rank_clause(p: FourSiteProblem, r: BoundaryAlgebraResult, target: int, samples: int, seed: int,
                      P3: np.ndarray | None = None) -> tuple[bool, list]:
    rng = np.random.default_rng(seed)
    support, kern = r.ground_support, r.ground_basis
    P0 = _projector(kern)
    s23 = p.sites("2", "3")
    ranks = []
    for b in r.kept:
        for m in _minimal_projectors(b, samples, rng):
            big = LocalOperator(s23, b.projector.dims, m).expand(support, p.sub_dims(support)).matrix
            red = partial_trace(LocalOperator(support, tuple(p.dims[s] for s in support), P0 @ big), p.sites("3")).matrix
            if P3 is not None:
                basis = _range_basis(P3)
                red = basis.conj().T @ red @ basis
            ranks.append(_rank(red))
    return all(k == target for k in ranks), ranks


def _site3_split(p: FourSiteProblem, seed: int):
    """``H_3 = H_31 (x) H_32`` with the site-3 interaction algebra on ``H_31``.

    Returns ``(U, n, m)`` with ``U`` unitary on site 3 (columns ordered
    (i, j)), or ``(None, d3, 1)`` when the algebra has a nontrivial center.
    """
    s3 = p.sites("3")
    ia3 = interaction_algebra([p.Q2X3], s3, p.sub_dims(s3))
    d3 = ia3.d
    if center(ia3).dim > 1:
        return None, d3, 1
    units, mult = matrix_units(ia3, np.eye(d3), seed)
    f = _range_basis(units[0])
    U = np.concatenate([u @ f for u in units], axis=1)
    return U, len(units), mult


def _reduce_site3(p: FourSiteProblem, U: np.ndarray, n: int, m: int) -> FourSiteProblem:
    """The problem with site 3 replaced by ``H_31``."""
    s3 = p.sites("3")
    support = canonical_sites(p.Q2X3.support + s3)
    q = p.Q2X3.expand(support, p.sub_dims(support))
    rest = [s for s in support if s not in s3]
    order = rest + list(s3)
    from .operators import embed_factor
    mat = embed_factor(q, order, p.dims)
    dr = int(np.prod([p.dims[s] for s in rest])) if rest else 1
    V = np.kron(np.eye(dr), U)
    t = (V.conj().T @ mat @ V).reshape(dr, n, m, dr, n, m)
    red = np.einsum("aibcjb->aicj", t).reshape(dr * n, dr * n) / m
    groups = dict(p.groups)
    groups["3"] = ("3'",)
    dims = {s: p.dims[s] for s in rest + [x for g in ("1", "2", "X") for x in p.groups[g]]}
    dims["3'"] = n
    from .operators import ordered_operator
    q_red = ordered_operator(red, rest + ["3'"], dims)
    return FourSiteProblem(groups, dims, p.Q12X, q_red, p.weights, {**p.provenance, "reduced_site3": [n, m]})


def _ia3_closure(p: FourSiteProblem, support_vecs: np.ndarray) -> np.ndarray:
    """Projector onto the smallest subspace invariant under the site-3 interaction
    algebra that contains the given vectors."""
    s3 = p.sites("3")
    ia3 = interaction_algebra([p.Q2X3], s3, p.sub_dims(s3))
    vecs = np.concatenate([b @ support_vecs for b in ia3.basis], axis=1)
    u, s, _ = np.linalg.svd(vecs, full_matrices=False)
    u = u[:, s > 1e-9 * max(1.0, s[0] if len(s) else 0.0)]
    return _projector(u)


def bound_check(p: FourSiteProblem, variant: str = "base", seed: int = 0, samples: int = 2) -> dict:
    """Check a variant's hypotheses mechanically, then its dimension bound.

    ``base``: ``D_BA <= D^2 D_3 / K``; ``proj``: ``D_BA <= D^4``; ``coro``:
    the first bound on the problem with site 3 reduced to the factor carrying
    its interaction algebra; ``coro2``: ``sum_a n_a <= D^2 D_31 / K`` with
    ``D_31`` the rank of the smallest invariant projector holding the ground
    states (hence ``D_BA <= (D^2 D_31 / K)^2``).
    """
    if variant not in ("base", "proj", "coro", "coro2"):
        raise ValueError(f"unknown variant {variant!r}")
    r = boundary_algebra(p, seed)
    D = p.group_dim("2")
    d3 = p.group_dim("3")
    rep = {"variant": variant, "D": D, "D3": d3, "D_BA": r.boundary_algebra_dim,
           "blocks": [b.size for b in r.kept], "seed": seed}
    if r.empty_ground:
        rep.update(hypotheses={"ground_space": False}, hypotheses_hold=False, bound=None, satisfied=None,
                   reason="empty ground space")
        return rep
    rho3 = _reduced_site3(p, r.ground_basis, r.ground_support)
    K = _rank(rho3)
    rep["K"] = K
    if variant == "base":
        h = _factored_hypotheses(p, seed)
        rep["hypotheses"] = h["hypotheses"]
        rep["detail"] = h["detail"]
        rep["bound"] = D * D * d3 / K
        rep["satisfied"] = r.boundary_algebra_dim * K <= D * D * d3
    elif variant == "proj":
        ok, ranks = _full_rank_clause(p, r, d3, samples, seed)
        rep["hypotheses"] = {"full_rank": ok}
        rep["detail"] = {"ranks": ranks}
        rep["bound"] = D ** 4
        rep["satisfied"] = r.boundary_algebra_dim <= D ** 4
    elif variant == "coro":
        U, n, m = _site3_split(p, seed)
        rep["D31"] = n
        if U is None:
            rep["hypotheses"] = {"site3_splits": False}
            rep["detail"] = {"reason": "site-3 interaction algebra has a nontrivial center"}
            red = p
        else:
            red = _reduce_site3(p, U, n, m)
        h = _factored_hypotheses(red, seed)
        hyp = dict(h["hypotheses"])
        hyp.setdefault("site3_splits", U is not None)
        rep["hypotheses"] = hyp
        rep["detail"] = h["detail"]
        rK = _rank(_reduced_site3(red, h["kernel"], h["support"]))
        rep["K"] = rK
        rep["bound"] = D * D * n / rK
        rep["satisfied"] = r.boundary_algebra_dim * rK <= D * D * n
    else:
        w, v = np.linalg.eigh(rho3)
        supp = v[:, w > RANK_TOL * max(1.0, w.max())]
        P3 = _ia3_closure(p, supp)
        n = int(round(np.trace(P3).real))
        ok, ranks = _full_rank_clause(p, r, n, samples, seed, P3)
        rep["D31"] = n
        rep["hypotheses"] = {"full_rank_on_P3": ok}
        rep["detail"] = {"ranks": ranks}
        total = sum(b.size for b in r.kept)
        rep["sum_block_sizes"] = total
        rep["bound"] = D * D * n / K
        rep["satisfied"] = total * K <= D * D * n
        rep["literal_satisfied"] = r.boundary_algebra_dim * K <= D * D * n
    clauses = [None if v is None else bool(v) for v in rep["hypotheses"].values()]
    rep["hypotheses_hold"] = all(v is True for v in clauses)
    # a clause left open is unverifiable only if no earlier clause already failed
    rep["unverifiable"] = any(v is None for v in clauses) and not any(v is False for v in clauses)
    return rep


# column groupings -----------------------------------------------------------

def four_site_from_column(model: LatticeModel, C: int, i: int, grouping: str = "left_only",
                          seed: int = 0) -> FourSiteProblem:
    """Group column ``C`` around row ``i``: rows below, row ``i``, rows above, and
    the neighbouring column(s) as X."""
    L = model.Ly
    if not 1 <= i <= L - 2:
        raise ValueError(f"center {i} outside 1..{L - 2}")
    if grouping not in ("left_only", "both_neighbors"):
        raise ValueError(f"unknown grouping {grouping!r}")
    xcols = [c for c in ((C - 1, C + 1) if grouping == "both_neighbors" else (C - 1,)) if 0 <= c < model.Lx]
    if not xcols:
        raise ValueError(f"column {C} has no neighbour for grouping {grouping}")
    groups = {
        "1": tuple((C, y) for y in range(i)),
        "2": ((C, i),),
        "X": canonical_sites(s for c in xcols for s in model.column(c)),
        "3": tuple((C, y) for y in range(i + 1, L)),
    }
    rng = np.random.default_rng(seed)
    terms = [t for c in xcols for t in model.window_terms(min(c, C))]
    terms.sort(key=lambda t: t.anchor)
    low, high, weights = [], [], {}
    for t in terms:
        y = t.anchor[1]
        if y + 1 <= i:
            low.append(t.Q)
        else:
            w = float(rng.uniform(1.0, 2.0))
            weights[t.anchor] = w
            high.append(t.Q * w)
    q12 = _sum(low, groups["2"], model.dims)
    q23 = _sum(high, groups["2"], model.dims)
    prov = {"column": C, "center": i, "grouping": grouping, "seed": seed, "model": model.meta.get("name")}
    return FourSiteProblem(groups, dict(model.dims), q12, q23, weights, prov)


def _sum(ops: list, fallback: tuple, dims: dict) -> LocalOperator:
    if not ops:
        return LocalOperator(fallback, tuple(dims[s] for s in fallback),
                             np.zeros((int(np.prod([dims[s] for s in fallback])),) * 2, dtype=complex))
    support = canonical_sites(s for o in ops for s in o.support)
    sub = {s: dims[s] for s in support}
    out = ops[0].expand(support, sub)
    for o in ops[1:]:
        out = out + o.expand(support, sub)
    return out


# random instances -------------------------------------------------------------

def random_four_site(seed: int, d1: int | None = None, d2: int = 2, dX: int | None = None,
                     d3: int | None = None, structured: bool | None = None) -> FourSiteProblem:
    """Random commuting pair from a block split ``H_2X = sum_a A_a (x) B_a``.

    ``Q12X`` acts on site 1 and the ``A_a`` factors, ``Q2X3`` on the ``B_a``
    factors and site 3, so the two commute by construction.  Structured
    instances give one block one-dimensional kernels on both sides and the
    other blocks a kernel-free ``Q2X3``, so that a unique zero state exists.
    """
    rng = np.random.default_rng(seed)
    structured = bool(rng.random() < 0.5) if structured is None else structured
    d1 = int(rng.integers(1, 3)) if d1 is None else d1
    dX = int(rng.integers(2, 4)) if dX is None else dX
    d3 = int(rng.integers(2, 4)) if d3 is None else d3
    n = d2 * dX
    blocks = _random_blocks(n, rng)
    W = random_unitary(n, rng)
    Q1 = np.zeros((d1 * n, d1 * n), dtype=complex)
    Q3 = np.zeros((n * d3, n * d3), dtype=complex)
    off = 0
    pick = int(rng.integers(len(blocks)))
    for k, (a, b) in enumerate(blocks):
        sz = a * b
        if structured:
            R = _random_psd(d1 * a, rng, 1 if k == pick else None)
            S = _random_psd(b * d3, rng, 1 if k == pick else 0)
        else:
            R = _random_psd(d1 * a, rng)
            S = _random_psd(b * d3, rng)
        # block embedding on (1, 2X) and (2X, 3)
        E = np.zeros((n, sz), dtype=complex)
        E[off:off + sz, :] = np.eye(sz)
        E = W @ E
        r4 = R.reshape(d1, a, d1, a)
        big1 = np.einsum("iajc,bd->iabjcd", r4, np.eye(b)).reshape(d1 * sz, d1 * sz)
        K1 = np.kron(np.eye(d1), E)
        Q1 += K1 @ big1 @ K1.conj().T
        big3 = np.kron(np.eye(a), S)
        K3 = np.kron(E, np.eye(d3))
        Q3 += K3 @ big3 @ K3.conj().T
        off += sz
    dims = {"1": d1, "2": d2, "X": dX, "3": d3}
    # the 2X index is (2, X) in that order
    q12 = LocalOperator(("1", "2", "X"), (d1, d2, dX), _herm(Q1))
    from .operators import ordered_operator
    q23 = ordered_operator(_herm(Q3), ["2", "X", "3"], dims)
    groups = {g: (g,) for g in GROUPS}
    return FourSiteProblem(groups, dims, q12, q23, {},
                           {"random_seed": seed, "blocks": blocks, "structured": structured})


def _herm(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2


def _random_blocks(n: int, rng) -> list:
    out = []
    left = n
    while left:
        sz = int(rng.integers(1, left + 1))
        divs = [k for k in range(1, sz + 1) if sz % k == 0]
        a = int(rng.choice(divs))
        out.append((a, sz // a))
        left -= sz
    return out


def _random_psd(d: int, rng, kernel: int | None = None) -> np.ndarray:
    """Random positive operator with a given (default: random nonzero) kernel dimension."""
    if d == 0:
        return np.zeros((0, 0))
    U = random_unitary(d, rng)
    k = int(rng.integers(1, d + 1)) if kernel is None else min(kernel, d)
    w = np.concatenate([np.zeros(k), rng.uniform(1.0, 2.0, d - k)])
    return (U * w) @ U.conj().T


def bound_campaign(seeds: Sequence[int], variants=("base", "proj", "coro", "coro2")) -> dict:
    """Run every variant on random instances; count holds, exclusions and violations."""
    out = {v: {"checked": 0, "excluded": 0, "unverifiable": 0, "violations": [], "max_D_BA": 0} for v in variants}
    for s in seeds:
        p = random_four_site(int(s))
        if not p.validate()["ok"]:
            raise RuntimeError(f"random instance {s} is not a commuting positive pair")
        for v in variants:
            rep = bound_check(p, v, seed=int(s))
            slot = out[v]
            if rep.get("unverifiable"):
                slot["unverifiable"] += 1
            elif not rep["hypotheses_hold"]:
                slot["excluded"] += 1
            else:
                slot["checked"] += 1
                slot["max_D_BA"] = max(slot["max_D_BA"], int(rep["D_BA"]))
                if v == "coro2" and not rep["literal_satisfied"]:
                    slot["literal_failures"] = slot.get("literal_failures", 0) + 1
                if not rep["satisfied"]:
                    slot["violations"].append({"seed": int(s), "report": _jsonable(rep)})
    return out


def _jsonable(rep: dict) -> dict:
    def fix(v):
        if isinstance(v, dict):
            return {str(k): fix(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [fix(x) for x in v]
        if isinstance(v, (np.integer,)):
            return int(v)
        if isinstance(v, (np.floating,)):
            return float(v)
        if isinstance(v, np.bool_):
            return bool(v)
        if isinstance(v, np.ndarray):
            return None
        return v
    return fix(rep)


# mps / perp split -------------------------------------------------------------

@dataclass
class MpsPerpResult:
    O_mps: MPO
    O_perp: LocalOperator
    certificate: dict


def _column_local(model: LatticeModel, C: int, O_C) -> LocalOperator:
    if isinstance(O_C, MPO):
        return O_C.to_local(model.column(C), model.column_dims(C))
    return O_C.expand(model.column(C), {s: model.dims[s] for s in model.column(C)})


def mps_perp_decompose(model: LatticeModel, C: int, O_C, grouping: str = "left_only", seed: int = 0,
                       check_bounds: bool = True) -> MpsPerpResult:
    """``O_C = O_mps + O_perp`` with ``O_mps`` swept by the boundary-algebra units."""
    col = model.column(C)
    cdims = {s: model.dims[s] for s in col}
    O = _column_local(model, C, O_C)
    side = "left" if grouping == "left_only" else "both"
    alg = column_interaction_algebra(model, C, side)
    cen = center(alg)
    cert = {"column": C, "grouping": grouping, "seed": seed,
            "central_residual": float(cen.residual(O.matrix) / max(1.0, O.norm()))}
    if cert["central_residual"] > 1e-8:
        raise ValueError(f"O_C is not central in the interaction algebra (residual {cert['central_residual']:.2e})")
    cur = O
    units = []
    ratios = []
    hyps = []
    for i in range(1, model.Ly - 1):
        p = four_site_from_column(model, C, i, grouping, seed + i)
        r = boundary_algebra(p, seed)
        u = r.unit().expand(col, cdims)
        units.append(u)
        cur = u @ cur @ u
        # commutes with Q2X3 of this center
        sup = canonical_sites(p.Q2X3.support + col)
        q = p.Q2X3.expand(sup, p.sub_dims(sup))
        c = cur.expand(sup, p.sub_dims(sup))
        hyps.append(float(commutator(c, q).norm() / max(1.0, c.norm() * q.norm())))
        if check_bounds:
            try:
                rep = bound_check(p, "coro", seed)
                ratios.append({"center": i, "D31": rep.get("D31"), "K": rep.get("K"),
                               "hypotheses_hold": rep["hypotheses_hold"]})
            except ResourceError as exc:
                ratios.append({"center": i, "unverifiable": str(exc)})
    O_mps = compress(MPO.from_dense(cur.matrix, list(cur.dims)))
    O_perp = O - cur
    cert["bond_dims"] = O_mps.bond_dims
    cert["qx3_commutators"] = hyps
    cert["centers"] = ratios
    cert["sum_residual"] = float((O_mps.to_local(col, cur.dims) + O_perp - O).norm())
    C0, C1 = (C - 1, C) if grouping == "left_only" else (max(C - 1, 0), min(C + 1, model.Lx - 1))
    W = window_mpo(model, C0, C1)
    E = embed_in_window(compress(MPO.from_dense(O_perp.matrix, list(O_perp.dims))), W, C - C0)
    scale = max(1.0, W.norm())
    cert["perp_window_left"] = float(multiply(E, W).norm() / scale)
    cert["perp_window_right"] = float(multiply(W, E).norm() / scale)
    proj = float(np.linalg.norm(O.matrix @ O.matrix - O.matrix))
    cert["input_projector"] = proj <= 1e-8
    if cert["input_projector"]:
        m = cur.matrix
        pp = O_perp.matrix
        cert["mps_projector_residual"] = float(np.linalg.norm(m @ m - m))
        cert["perp_projector_residual"] = float(np.linalg.norm(pp @ pp - pp))
    verified = [x for x in ratios if x.get("hypotheses_hold")]
    if check_bounds and verified and len(verified) == len(ratios):
        D = max(model.dims[s] for s in col)
        limit = max(D * D * x["D31"] / x["K"] for x in verified)
        cert["bond_limit"] = limit
        if O_mps.max_bond > limit + 1e-9:
            raise BoundViolation(f"bond dimension {O_mps.max_bond} exceeds {limit}")
    return MpsPerpResult(O_mps, O_perp, cert)


# witnesses ------------------------------------------------------------------

@dataclass
class Theorem3Result:
    verdict: str  # witness | refused
    witness: Witness | None = None
    report: dict = field(default_factory=dict)
    reason: str | None = None


def _select_sequence(model: LatticeModel, options: list) -> list | None:
    """Depth-first search for central projectors with a positive joint trace."""
    from .mpo import propagate
    n = model.Lx
    windows = [window_mpo(model, C) for C in range(n - 1)]

    def rec(C, sigma, chosen):
        for k, m in enumerate(options[C]):
            if C == 0:
                nxt = m
            else:
                nxt = multiply(sigma, m)
            if C == n - 1:
                if nxt.trace().real > 1e-9:
                    return chosen + [k]
                continue
            rho = propagate(nxt, windows[C])
            if rho.norm() <= 1e-10:
                continue
            res = rec(C + 1, rho, chosen + [k])
            if res is not None:
                return res
        return None

    return rec(0, None, [])


def theorem3_witness(model: LatticeModel, seed: int = 0, check_bounds: bool = True) -> Theorem3Result:
    """Witness built from central projectors replaced by their MPO parts."""
    count = brute_force_zero_count(model)
    rep = {"zero_count": count.count, "seed": seed}
    if count.count == 0:
        return Theorem3Result("refused", None, rep, "no zero-energy state (brute-force count 0)")
    options = []
    for C in range(model.Lx):
        if C == 0:
            options.append([compress(MPO.identity(list(model.column_dims(0))))])
            continue
        dec = column_decomposition(model, C, "left", seed)
        options.append([compress(column_mpo(p, model, C)) for p in dec.projectors])
    picks = _select_sequence(model, options)
    if picks is None:
        raise RuntimeError("no consistent sequence of central projectors despite a nonzero count")
    entries = {}
    certs = {}
    for C, k in enumerate(picks):
        if C == 0:
            entries[C] = options[C][k]
            continue
        res = mps_perp_decompose(model, C, options[C][k], "left_only", seed, check_bounds)
        entries[C] = res.O_mps
        certs[C] = {key: v for key, v in res.certificate.items() if key != "centers"}
    w = Witness(entries)
    ver = verify_witness(model, w)
    rep.update(picks=picks, bond_dims={C: m.bond_dims for C, m in entries.items()},
               certificates=certs, verification=ver.to_dict())
    if not ver.accepted:
        raise RuntimeError(f"verifier rejected the constructed witness: {ver.reason}")
    return Theorem3Result("witness", w, rep)
