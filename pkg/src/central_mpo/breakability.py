"""Splitting central operators across a region boundary, and the holes split.

A region ``S`` has boundary ``B`` (sites of ``S`` lying in some plaquette that
leaves ``S``), interior ``I = S \\ B`` and exterior ``E``.  The interaction
algebras on ``B`` of the interior terms (plaquettes inside ``S``) and of the
remaining terms commute; when they act on separate tensor factors
``H_B = H_{B->E} (x) H_{B->I}``, operators commuting with the terms can be cut
along that factorization by singular value decompositions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .algebra import (
    FactorizationObstruction,
    OperatorAlgebra,
    TensorFactorization,
    center,
    interaction_algebra,
    minimal_central_projectors,
    tensor_factorize,
    trivial_algebra,
)
from .lattice import LatticeModel, light, plaquette_sites, window_operator
from .mpo import column_mpo
from .operators import (
    LocalOperator,
    ResourceError,
    canonical_sites,
    commutator_residual,
    embed_factor,
    ordered_operator,
    operator_schmidt,
    partial_trace,
    random_unitary,
)
from .stabilizer import PauliString
from .verifier import Witness, brute_force_zero_count, verify_witness

COMMUTE_TOL = 1e-8
SVD_CUTOFF = 1e-12


# regions ------------------------------------------------------------------

@dataclass
class RegionSpec:
    S: tuple
    B: tuple
    I: tuple
    E: tuple
    A: tuple = ()
    X: tuple = ()
    Y: tuple = ()

    def with_split(self, A: Sequence = (), X: Sequence = (), Y: Sequence = ()) -> "RegionSpec":
        return RegionSpec(self.S, self.B, self.I, self.E, canonical_sites(A), canonical_sites(X), canonical_sites(Y))

    def to_dict(self) -> dict:
        return {k: [list(s) for s in getattr(self, k)] for k in ("S", "B", "I", "E", "A", "X", "Y")}


def boundary_of(model: LatticeModel, S: Sequence, A: Sequence = (), X: Sequence = (), Y: Sequence = ()) -> RegionSpec:
    """Split the lattice into boundary, interior and exterior of ``S``."""
    S = set(tuple(s) for s in S)
    if not S:
        raise ValueError("region S is empty")
    missing = [s for s in S if s not in model.dims]
    if missing:
        raise ValueError(f"sites {sorted(missing)} are not on the lattice")
    B = set()
    for anchor in model.anchors:
        Z = set(plaquette_sites(*anchor))
        if not Z <= S:
            B |= Z & S
    I = S - B
    E = set(model.sites) - S
    return RegionSpec(canonical_sites(S), canonical_sites(B), canonical_sites(I), canonical_sites(E),
                      canonical_sites(A), canonical_sites(X), canonical_sites(Y))


def plaquettes_meeting(model: LatticeModel, X: Sequence, Y: Sequence) -> list:
    """Anchors of plaquettes containing a site of ``X`` and a site of ``Y``."""
    X, Y = set(X), set(Y)
    return [a for a in model.anchors if set(plaquette_sites(*a)) & X and set(plaquette_sites(*a)) & Y]


def interior_terms(model: LatticeModel, region: RegionSpec) -> list:
    S = set(region.S)
    return [t for t in model.terms if set(plaquette_sites(*t.anchor)) <= S]


def exterior_terms(model: LatticeModel, region: RegionSpec) -> list:
    S = set(region.S)
    return [t for t in model.terms if not set(plaquette_sites(*t.anchor)) <= S]


# boundary factorization ---------------------------------------------------

@dataclass
class BoundaryFactorization:
    region: RegionSpec
    exterior: OperatorAlgebra
    interior: OperatorAlgebra
    factorization: TensorFactorization | None
    obstruction: FactorizationObstruction | None
    shared_center_dim: int
    central_element: LocalOperator | None = None
    residual: float = 0.0

    @property
    def ok(self) -> bool:
        return self.factorization is not None

    def to_dict(self) -> dict:
        out = {
            "factorizes": self.ok,
            "B": [list(s) for s in self.region.B],
            "exterior_dim": self.exterior.dim,
            "interior_dim": self.interior.dim,
            "shared_center_dim": self.shared_center_dim,
            "residual": self.residual,
        }
        if self.ok:
            out["factor_dims"] = list(self.factorization.dims)
        else:
            out["multiplicities"] = self.obstruction.multiplicities.tolist()
        return out


def _algebra_on(terms, B, dims) -> OperatorAlgebra:
    ops = [t.P for t in terms if set(t.P.support) & set(B)]
    if not ops:
        return trivial_algebra(B, [dims[s] for s in B], flagged=True)
    return interaction_algebra(ops, B, {s: dims[s] for s in B})


def _shared_center(A: OperatorAlgebra, B: OperatorAlgebra):
    """Basis of the intersection of the two centers (as operator spans)."""
    za, zb = center(A).basis, center(B).basis
    d = A.d
    M = np.concatenate([za.reshape(len(za), -1), -zb.reshape(len(zb), -1)]).T
    _, s, vh = np.linalg.svd(M, full_matrices=False)
    null = vh.conj().T[:, s <= 1e-8]
    return (null[: len(za)].T @ za.reshape(len(za), -1)).reshape(-1, d, d)


def _split_residual(fact: TensorFactorization, alg: OperatorAlgebra, first: bool) -> float:
    """How far the algebra's generators are from ``X (x) 1`` (or ``1 (x) X``)."""
    worst = 0.0
    da, db = fact.dims
    for g in alg.gens():
        t = fact.split(g)
        if first:
            core = np.einsum("abcb->ac", t) / db
            ideal = np.einsum("ac,bd->abcd", core, np.eye(db))
        else:
            core = np.einsum("abad->bd", t) / da
            ideal = np.einsum("ac,bd->abcd", np.eye(da), core)
        worst = max(worst, float(np.linalg.norm(t - ideal) / max(np.linalg.norm(g), 1e-300)))
    return worst


def ext_int_factorization(model: LatticeModel, region: RegionSpec, seed: int = 0) -> BoundaryFactorization:
    """Factorize the boundary space so that exterior and interior algebras separate."""
    B = list(region.B)
    if not B:
        fact = TensorFactorization(np.eye(1, dtype=complex), (1, 1), np.ones((1, 1), dtype=int))
        triv = trivial_algebra((), ())
        return BoundaryFactorization(region, triv, triv, fact, None, 1)
    AI = _algebra_on(interior_terms(model, region), B, model.dims)
    AE = _algebra_on(exterior_terms(model, region), B, model.dims)
    shared = _shared_center(AE, AI)
    result = tensor_factorize(AE, AI, seed)
    central = None
    if len(shared) > 1:
        # traceless part of a shared central element: the charge it measures
        d = AE.d
        parts = [z - np.trace(z) / d * np.eye(d) for z in shared]
        v = max(parts, key=np.linalg.norm)
        v = v / np.linalg.norm(v) * np.sqrt(d)
        central = LocalOperator(AE.support, AE.dims, v)
    if isinstance(result, FactorizationObstruction):
        return BoundaryFactorization(region, AE, AI, None, result, len(shared), central)
    res = max(_split_residual(result, AE, True), _split_residual(result, AI, False))
    return BoundaryFactorization(region, AE, AI, result, None, len(shared), central, res)


# decompositions -----------------------------------------------------------

@dataclass
class BreakDecomposition:
    """``sum_k coefficients[k] * prod(terms[k])``, product taken in list order."""

    terms: list
    labels: tuple
    coefficients: list = field(default_factory=list)
    commuting_flags: list = field(default_factory=list)
    commutator_residuals: list = field(default_factory=list)
    singular_values: list = field(default_factory=list)
    reconstruction_residual: float | None = None

    def __len__(self):
        return len(self.terms)

    def reconstruct(self) -> LocalOperator:
        """Sum of the products, grouping terms that share their last factor."""
        groups: dict = {}
        order = []
        for c, factors in zip(self.coefficients, self.terms):
            key = id(factors[-1])
            if key not in groups:
                groups[key] = (factors[-1], [])
                order.append(key)
            groups[key][1].append((c, factors[:-1]))
        total = None
        for key in order:
            last, prefixes = groups[key]
            acc = None
            for c, factors in prefixes:
                p = LocalOperator((), (), np.eye(1, dtype=complex)) * c
                for f in factors:
                    p = p @ f
                acc = p if acc is None else acc + p
            term = acc @ last
            total = term if total is None else total + term
        return total

    def max_commutator(self) -> float:
        flat = [r for rs in self.commutator_residuals for r in rs]
        return max(flat) if flat else 0.0

    def all_commuting(self) -> bool:
        return all(all(f) for f in self.commuting_flags)

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "n_terms": len(self.terms),
            "singular_values": [float(s) for s in self.singular_values],
            "max_commutator": self.max_commutator(),
            "all_commuting": self.all_commuting(),
            "reconstruction_residual": self.reconstruction_residual,
        }


@dataclass
class HypothesisFailure:
    reason: str
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"failure": self.reason, **self.detail}


def term_algebra_residual(op: LocalOperator, model: LatticeModel) -> float:
    worst = 0.0
    for t in model.terms:
        worst = max(worst, commutator_residual(op, t.P))
    return worst


def _flag(decomp: BreakDecomposition, model: LatticeModel, tol: float) -> None:
    cache: dict = {}
    decomp.commutator_residuals = []
    decomp.commuting_flags = []
    for factors in decomp.terms:
        rs = []
        for f in factors:
            if id(f) not in cache:
                cache[id(f)] = term_algebra_residual(f, model)
            rs.append(cache[id(f)])
        decomp.commutator_residuals.append(rs)
        decomp.commuting_flags.append([r <= tol for r in rs])


def _relative(a: LocalOperator, b: LocalOperator) -> float:
    x, y = a._aligned(b)
    return float(np.linalg.norm(x.matrix - y.matrix) / max(np.linalg.norm(y.matrix), 1e-300))


def _unitary_frame(fact: TensorFactorization, dB: int) -> np.ndarray:
    U = fact.iso
    if U.shape != (dB, dB):
        raise ValueError("boundary factorization is not square")
    return U


def _ext_int_split(O: LocalOperator, region: RegionSpec, model: LatticeModel, fact: TensorFactorization):
    """SVD of ``O`` across ``H_{X\\B} (x) H_{B->E}`` versus ``H_{B->I} (x) H_{A^I}``.

    Returns the ext/int matrices in the factorized frame together with the
    site orders and dimensions needed to map them back.
    """
    dims = model.dims
    A = set(O.support) | set(region.A)
    I, B = set(region.I), list(region.B)
    xb = list(canonical_sites(A - I - set(B)))
    ai = list(canonical_sites(A & I))
    order = xb + B + ai
    dxb = int(np.prod([dims[s] for s in xb])) if xb else 1
    dB = int(np.prod([dims[s] for s in B])) if B else 1
    dai = int(np.prod([dims[s] for s in ai])) if ai else 1
    de, di = fact.dims
    U = _unitary_frame(fact, dB)
    M = embed_factor(O, order, dims) if order else O.matrix
    t = M.reshape(dxb, dB, dai, dxb, dB, dai)
    t = np.einsum("be,abcxyz,yf->aecxfz", U.conj(), t, U, optimize=True)
    t = t.reshape(dxb, de, di, dai, dxb, de, di, dai)
    m = t.transpose(0, 1, 4, 5, 2, 3, 6, 7).reshape((dxb * de) ** 2, (di * dai) ** 2)
    return m, (xb, B, ai), (dxb, de, di, dai), U


def _to_sites(ext: np.ndarray, integ: np.ndarray, layout, dimsx, U, dims):
    """Map frame matrices back to site operators on ``X\\B + B`` and ``B + A^I``."""
    (xb, B, ai), (dxb, de, di, dai) = layout, dimsx
    dB = de * di
    e = np.einsum("aebf,ij->aeibfj", ext.reshape(dxb, de, dxb, de), np.eye(di)).reshape(dxb, dB, dxb, dB)
    e = np.einsum("yk,akbl,zl->aybz", U, e, U.conj(), optimize=True).reshape(dxb * dB, dxb * dB)
    n = np.einsum("ef,icjd->eicfjd", np.eye(de), integ.reshape(di, dai, di, dai)).reshape(dB, dai, dB, dai)
    n = np.einsum("yk,kclf,zl->yczf", U, n, U.conj(), optimize=True).reshape(dB * dai, dB * dai)
    ext_op = ordered_operator(e, xb + B, dims) if xb + B else LocalOperator((), (), e)
    int_op = ordered_operator(n, B + ai, dims) if B + ai else LocalOperator((), (), n)
    return ext_op, int_op


def _gauge(u: np.ndarray, v: np.ndarray):
    k = int(np.argmax(np.abs(u)))
    ph = u.flat[k] / abs(u.flat[k])
    return u / ph, v * ph


def _require_factorization(model, region, factorization, seed):
    fact = factorization if factorization is not None else ext_int_factorization(model, region, seed)
    if isinstance(fact, BoundaryFactorization):
        if not fact.ok:
            raise ValueError("boundary algebras do not factorize; no ext/int split exists")
        fact = fact.factorization
    return fact


def check_exterior_commutation(O: LocalOperator, region: RegionSpec, model: LatticeModel, tol: float = COMMUTE_TOL):
    """First plaquette meeting the exterior whose term fails to commute with ``O``."""
    E = set(region.E)
    for t in model.terms:
        if set(plaquette_sites(*t.anchor)) & E:
            r = commutator_residual(O, t.P)
            if r > tol:
                return t.anchor, r
    return None


def break_two(O: LocalOperator, region: RegionSpec, model: LatticeModel, factorization=None,
              tol: float = COMMUTE_TOL, seed: int = 0) -> BreakDecomposition:
    """``O = sum_a O^a_{X+B} O^a_{B+AI}`` with ``X = A \\ I`` and orthogonal families."""
    bad = check_exterior_commutation(O, region, model, tol)
    if bad is not None:
        raise ValueError(f"operator does not commute with the term at plaquette {bad[0]} (residual {bad[1]:.2e})")
    fact = _require_factorization(model, region, factorization, seed)
    m, layout, dimsx, U = _ext_int_split(O, region, model, fact)
    dxb, de, di, dai = dimsx
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    keep = np.flatnonzero(s > SVD_CUTOFF * max(s[0], 1e-300)) if len(s) else []
    terms = []
    for k in keep:
        ext, integ = _gauge(u[:, k].reshape(dxb * de, dxb * de), s[k] * vh[k].reshape(di * dai, di * dai))
        terms.append(list(_to_sites(ext, integ, layout, dimsx, U, model.dims)))
    out = BreakDecomposition(terms, ("X+B", "B+AI"), [1.0] * len(terms), singular_values=list(s[keep]))
    _flag(out, model, tol)
    out.reconstruction_residual = _relative(out.reconstruct(), O) if terms else float(O.norm() > 0)
    return out


def _sub_region(region: RegionSpec, A: Sequence) -> RegionSpec:
    return region.with_split(A=A, X=region.X, Y=region.Y)


def break_three(O: LocalOperator, region: RegionSpec, model: LatticeModel, I1: Sequence | None = None,
                factorization=None, tol: float = COMMUTE_TOL, seed: int = 0):
    """``O = sum_k c_k O^k_{X+B} O^k_{Y+B} O^k_I`` with every factor commuting with the terms.

    ``I1`` is the part of ``A & I`` grouped with ``X`` (default ``(A & I) \\ Y``).
    Returns a :class:`HypothesisFailure` when a precondition does not hold.
    """
    X, Y, I = set(region.X), set(region.Y), set(region.I)
    A = set(region.A) | set(O.support) | X | Y
    if X & Y:
        return HypothesisFailure("X and Y overlap", {"sites": [list(s) for s in canonical_sites(X & Y)]})
    if (A - I) != (X | Y):
        return HypothesisFailure("A \\ I is not the union of X and Y")
    both = plaquettes_meeting(model, X, Y)
    if both:
        return HypothesisFailure("a plaquette meets both X and Y", {"plaquettes": [list(a) for a in both]})
    worst = term_algebra_residual(O, model)
    if worst > tol:
        return HypothesisFailure("operator does not commute with the term algebra", {"residual": worst})
    bf = factorization if factorization is not None else ext_int_factorization(model, region, seed)
    if isinstance(bf, BoundaryFactorization) and not bf.ok:
        return HypothesisFailure("boundary algebras do not factorize",
                                 {"shared_center_dim": bf.shared_center_dim})
    fact = _require_factorization(model, region, bf, seed)
    AI = A & I
    I1 = (AI - Y) if I1 is None else set(I1) & AI
    I2 = AI - I1
    A1, A2 = X | I1, Y | I2
    dims = model.dims

    # 1. split O between A1 and A2
    O = O.expand(canonical_sites(A), dims)
    left, right = operator_schmidt(O, A1)
    pieces = []  # (ext1, int1, ext2, int2) in the factorized frame
    frame = {}
    for L, R in zip(left, right):
        L = L if L.support else LocalOperator((), (), L.matrix)
        # 2. break each half at the boundary
        h1 = _frame_split(L, region.with_split(A=A1, X=X), model, fact)
        h2 = _frame_split(R, region.with_split(A=A2, X=Y), model, fact)
        frame.setdefault("x", h1[1])
        frame.setdefault("y", h2[1])
        for e1, n1 in h1[0]:
            for e2, n2 in h2[0]:
                pieces.append((e1, n1, e2, n2))
    if not pieces:
        return BreakDecomposition([], ("X+B", "Y+B", "I"), [], reconstruction_residual=0.0)
    # 3. regroup: ext_k = ext1_k ext2_k on X\B + Y\B + B->E, int_k = int1_k int2_k on B->I + A^I
    (xb, B, i1), (dxb, de, di, dI1) = frame["x"]
    (yb, _, i2), (dyb, _, _, dI2) = frame["y"]
    ext = []
    integ = []
    for e1, n1, e2, n2 in pieces:
        a = np.einsum("aebf,cg->acebgf", e1.reshape(dxb, de, dxb, de), np.eye(dyb))
        b = np.einsum("ab,cegf->acebgf", np.eye(dxb), e2.reshape(dyb, de, dyb, de))
        dext = dxb * dyb * de
        ext.append(a.reshape(dext, dext) @ b.reshape(dext, dext))
        n1f = np.einsum("ibjd,ce->ibcjde", n1.reshape(di, dI1, di, dI1), np.eye(dI2))
        n2f = np.einsum("bd,icje->ibcjde", np.eye(dI1), n2.reshape(di, dI2, di, dI2))
        dint = di * dI1 * dI2
        integ.append(n1f.reshape(dint, dint) @ n2f.reshape(dint, dint))
    G = np.array([e.reshape(-1) for e in ext]).T
    H = np.array([n.reshape(-1) for n in integ]).T
    # 4. re-orthogonalize through the K x K core of G H^T
    qg, rg = np.linalg.qr(G)
    qh, rh = np.linalg.qr(H)
    u, s, vh = np.linalg.svd(rg @ rh.T, full_matrices=False)
    keep = np.flatnonzero(s > SVD_CUTOFF * max(s[0], 1e-300))
    # express each new ext vector through an independent subset of the old products
    _, _, piv = scipy.linalg.qr(G, mode="economic", pivoting=True)
    rank = int(np.linalg.matrix_rank(G, tol=1e-10 * max(np.linalg.norm(G, 2), 1e-300)))
    cols = np.sort(piv[:rank])
    coef, *_ = np.linalg.lstsq(G[:, cols], qg @ u[:, keep], rcond=None)
    int_vecs = (qh @ vh[keep].T).T * s[keep][:, None]
    # map factors back to lattice sites
    AIs = list(i1) + list(i2)
    to_site = {}
    terms, coefficients = [], []
    I_ops = []
    for j, k in enumerate(keep):
        m = int_vecs[j].reshape(di * dI1 * dI2, di * dI1 * dI2)
        _, n = _to_sites(np.eye(de), m, ([], B, AIs), (1, de, di, dI1 * dI2), fact.iso, dims)
        I_ops.append(n)
    for idx in cols:
        e1, _, e2, _ = pieces[idx]
        to_site[idx] = (
            _to_sites(e1, np.eye(di * dI1), (xb, B, i1), (dxb, de, di, dI1), fact.iso, dims)[0],
            _to_sites(e2, np.eye(di * dI2), (yb, B, i2), (dyb, de, di, dI2), fact.iso, dims)[0],
        )
    for j in range(len(keep)):
        for r, idx in enumerate(cols):
            c = coef[r, j]
            if abs(c) <= 1e-14 * np.max(np.abs(coef[:, j])):
                continue
            fx, fy = to_site[idx]
            terms.append([fx, fy, I_ops[j]])
            coefficients.append(complex(c))
    out = BreakDecomposition(terms, ("X+B", "Y+B", "I"), coefficients, singular_values=list(s[keep]))
    _flag(out, model, tol)
    out.reconstruction_residual = _relative(out.reconstruct(), O)
    return out


def _frame_split(O: LocalOperator, region: RegionSpec, model: LatticeModel, fact: TensorFactorization):
    """Ext/int SVD pairs of ``O`` kept in the factorized frame."""
    bad = check_exterior_commutation(O, region, model)
    if bad is not None:
        raise ValueError(f"half operator does not commute with the term at plaquette {bad[0]}")
    m, layout, dimsx, _ = _ext_int_split(O, region, model, fact)
    dxb, de, di, dai = dimsx
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    keep = np.flatnonzero(s > SVD_CUTOFF * max(s[0], 1e-300)) if len(s) else []
    pairs = [_gauge(u[:, k].reshape(dxb * de, dxb * de), s[k] * vh[k].reshape(di * dai, di * dai)) for k in keep]
    return pairs, (layout, dimsx)


# the toric-code obstruction ------------------------------------------------

def _light_stabilizers(model: LatticeModel) -> list:
    out = []
    for t in model.terms:
        for g, _ in t.paulis or []:
            if len(g) == 4 and set(g.values()) == {"Z"} and light(*t.anchor):
                out.append(g)
    if not out:
        raise ValueError("model carries no light-plaquette Z stabilizers")
    return out


def _pauli_of(O, sites):
    if isinstance(O, dict):
        return PauliString.from_dict(O, sites)
    return None


def _dense_relation(O: LocalOperator, zsites: set, anti: bool) -> float:
    """Normalized ``||O T_s +- T_s O||`` with ``T_s`` the Z-string restricted to supp O."""
    diag = np.ones(1)
    for s, d in zip(O.support, O.dims):
        z = np.array([1.0, -1.0]) if s in zsites else np.ones(d)
        diag = np.kron(diag, z)
    T = np.diag(diag)
    m = O.matrix @ T + (1 if anti else -1) * T @ O.matrix
    return float(np.linalg.norm(m) / np.sqrt(O.dim))


def obstruction_witness_toric(model: LatticeModel, O, partition: int | None = None) -> dict:
    """Commutation pattern of ``O`` with the light-plaquette product and its two halves.

    ``O`` is a Pauli dict (site -> letter) or a LocalOperator.  ``partition`` is
    the last row of the top half (default ``Ly // 2``).
    """
    sites = list(model.sites)
    cut = model.Ly // 2 if partition is None else partition
    light_gens = _light_stabilizers(model)
    T = PauliString(np.zeros(len(sites)), np.zeros(len(sites)))
    for g in light_gens:
        T = T * PauliString.from_dict(g, sites)
    M = [s for s in sites if s[0] in (0, model.Lx - 1) or s[1] in (0, model.Ly - 1)]
    boundary = PauliString.from_dict({s: "Z" for s in M}, sites)
    same = np.array_equal(T.x, boundary.x) and np.array_equal(T.z, boundary.z) and T.phase == boundary.phase
    top = {s for s in M if s[1] <= cut}
    bottom = {s for s in M if s[1] > cut}
    P = _pauli_of(O, sites)
    if P is not None:
        Tt = PauliString.from_dict({s: "Z" for s in top}, sites)
        Tb = PauliString.from_dict({s: "Z" for s in bottom}, sites)
        # Pauli strings either commute or anticommute: the other norm is 2
        comm_T = 0.0 if P.commutes(boundary) else 2.0
        anti_t = 0.0 if not P.commutes(Tt) else 2.0
        anti_b = 0.0 if not P.commutes(Tb) else 2.0
        method = "pauli"
    else:
        comm_T = _dense_relation(O, set(M), anti=False)
        anti_t = _dense_relation(O, top, anti=True)
        anti_b = _dense_relation(O, bottom, anti=True)
        method = "dense"
    premise = comm_T <= 1e-9
    both = anti_t <= 1e-9 and anti_b <= 1e-9
    if not premise:
        verdict = "premise fails: O does not commute with T"
    elif both:
        verdict = "unbreakable: anticommutes with both halves"
    else:
        verdict = "no obstruction: O commutes with " + ("T^t" if anti_t > 1e-9 else "T^b")
    return {
        "T_residual": 0.0 if same else 2.0,
        "T_support": [list(s) for s in M],
        "commutator_T": comm_T,
        "anticommutator_Tt": anti_t,
        "anticommutator_Tb": anti_b,
        "partition": cut,
        "premise": premise,
        "obstruction": premise and both,
        "verdict": verdict,
        "method": method,
    }


def column_x_string(model: LatticeModel, C: int) -> dict:
    return {s: "X" for s in model.column(C)}


# synthetic factorizable models ----------------------------------------------

def synthetic_factorizable_model(Lx: int, Ly: int, holes: Sequence[Sequence], seed: int, p_allow: float = 0.6,
                                 frustrate: Sequence[int] = ()) -> LatticeModel:
    """Commuting qubit model whose boundary algebras split site by site.

    Every boundary site of a hole is assigned to the exterior or the interior;
    exterior terms act trivially on interior-assigned boundary sites and vice
    versa.  Terms are random diagonal projectors in a random local frame, so
    every operator diagonal in that frame commutes with all of them.  Holes
    listed in ``frustrate`` get two interior terms with disjoint ranges.
    """
    rng = np.random.default_rng(seed)
    model = LatticeModel.empty(Lx, Ly, 2, name="synthetic", seed=seed, holes=[[list(s) for s in h] for h in holes])
    regions = [boundary_of(model, h) for h in holes]
    _check_disjoint(regions)
    role = {}
    for r in regions:
        for s in r.B:
            role[s] = "E" if rng.random() < 0.5 else "I"
    frames = {s: random_unitary(2, rng) for s in model.sites}
    model.meta["frames"] = {f"{s[0]},{s[1]}": [frames[s].real.tolist(), frames[s].imag.tolist()] for s in model.sites}
    masks = {}
    for anchor in model.anchors:
        Z = plaquette_sites(*anchor)
        inside = any(set(Z) <= set(r.S) for r in regions)
        skip = "E" if inside else "I"
        acting = [s for s in Z if role.get(s) != skip]
        if not acting:
            continue
        mask = rng.random(2 ** len(acting)) < p_allow
        if not mask.any():
            mask[rng.integers(len(mask))] = True
        masks[anchor] = (acting, mask.reshape([2] * len(acting)))
    for h in frustrate:
        _frustrate(regions[h], masks, rng)
    model.meta["roles"] = {f"{s[0]},{s[1]}": r for s, r in sorted(role.items())}
    for anchor, (acting, mask) in sorted(masks.items()):
        V = np.eye(1)
        for s in acting:
            V = np.kron(V, frames[s])
        P = V @ np.diag(mask.reshape(-1).astype(complex)) @ V.conj().T
        model.add_term(LocalOperator(tuple(acting), (2,) * len(acting), P), anchor=anchor)
    return model


def _frustrate(region: RegionSpec, masks: dict, rng) -> None:
    inside = [a for a in masks if set(plaquette_sites(*a)) <= set(region.S)]
    for a, b in itertools.combinations(inside, 2):
        common = set(masks[a][0]) & set(masks[b][0])
        if common:
            s = sorted(common)[0]
            for anchor, value in ((a, 0), (b, 1)):
                acting, mask = masks[anchor]
                idx = [slice(None)] * len(acting)
                idx[acting.index(s)] = 1 - value
                mask = mask.copy()
                mask[tuple(idx)] = False
                masks[anchor] = (acting, mask)
            return
    if inside:
        acting, mask = masks[inside[0]]
        masks[inside[0]] = (acting, np.zeros_like(mask))


def frame_diagonal_operator(model: LatticeModel, sites: Sequence, rng) -> LocalOperator:
    """Random operator diagonal in the model's local frames (hence central)."""
    sites = canonical_sites(sites)
    frames = {tuple(int(c) for c in k.split(",")): np.array(re) + 1j * np.array(im)
              for k, (re, im) in model.meta["frames"].items()}
    V = np.eye(1)
    for s in sites:
        V = np.kron(V, frames[s])
    d = V.shape[0]
    diag = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return LocalOperator(sites, (2,) * len(sites), V @ np.diag(diag) @ V.conj().T)


# holes ------------------------------------------------------------------------

def _check_disjoint(regions: Sequence[RegionSpec]) -> None:
    seen = set()
    for k, r in enumerate(regions):
        if seen & set(r.S):
            raise ValueError(f"hole {k} overlaps an earlier hole")
        seen |= set(r.S)


def _sub_model(model: LatticeModel, terms: list, sites=None) -> LatticeModel:
    sites = model.sites if sites is None else canonical_sites(sites)
    sub = LatticeModel(model.Lx, model.Ly, {s: model.dims[s] for s in sites}, list(terms), dict(model.meta))
    return sub


def _count(model: LatticeModel) -> int:
    if model.total_dim() <= 4096:
        return brute_force_zero_count(model, "dense").count
    return brute_force_zero_count(model, "transfer").count


@dataclass
class ChainModel:
    """Two-body commuting problem on column supersites: ``bonds[C]`` couples ``C, C+1``."""

    supersites: list
    bonds: list

    def zero_count(self) -> int:
        rho = LocalOperator.identity(self.supersites[0], [2] * len(self.supersites[0]))
        if not self.bonds:
            return int(round(rho.trace().real))
        for C, W in enumerate(self.bonds):
            rho = partial_trace(rho.expand(W.support, W.site_dims) @ W, self.supersites[C + 1])
        return int(round(rho.trace().real))


def coarse_grain(model: LatticeModel) -> ChainModel:
    """Fuse each column into one supersite; each window product is a two-body term."""
    sup = [list(model.column(C)) for C in range(model.Lx)]
    bonds = [window_operator(model, C) for C in range(model.Lx - 1)]
    return ChainModel(sup, bonds)


@dataclass
class HolesReport:
    regions: list
    factorizations: list
    obstructed: list
    hole_counts: list = field(default_factory=list)
    exterior_count: int | None = None
    interior_count: int | None = None
    total_count: int | None = None
    coarse: ChainModel | None = None
    verdict: str = "undetermined"

    @property
    def equivalence_holds(self) -> bool | None:
        if self.total_count is None or self.exterior_count is None:
            return None
        return (self.total_count >= 1) == (self.exterior_count >= 1 and self.interior_count >= 1)

    def to_dict(self) -> dict:
        return {
            "holes": [r.to_dict() for r in self.regions],
            "factorizations": [f.to_dict() for f in self.factorizations],
            "obstructed": self.obstructed,
            "hole_counts": self.hole_counts,
            "exterior_count": self.exterior_count,
            "interior_count": self.interior_count,
            "total_count": self.total_count,
            "equivalence_holds": self.equivalence_holds,
            "verdict": self.verdict,
        }


def split_hamiltonian(model: LatticeModel, regions: Sequence[RegionSpec]):
    """Terms inside some hole (``H_I``) and the rest (``H_E``)."""
    inside, outside = [], []
    for t in model.terms:
        Z = set(plaquette_sites(*t.anchor))
        (inside if any(Z <= set(r.S) for r in regions) else outside).append(t)
    return inside, outside


def holes_split(model: LatticeModel, holes: Sequence[Sequence], seed: int = 0, total: bool = True) -> HolesReport:
    """Factorize every hole boundary, then count ``H_E``, ``H_I`` and each hole alone."""
    regions = [boundary_of(model, h) for h in holes]
    _check_disjoint(regions)
    for k, r in enumerate(regions):
        if not any(set(plaquette_sites(*a)) <= set(r.S) for a in model.anchors):
            raise ValueError(f"hole {k} contains no plaquette")
    facts = [ext_int_factorization(model, r, seed) for r in regions]
    obstructed = [k for k, f in enumerate(facts) if not f.ok]
    rep = HolesReport(regions, facts, obstructed)
    if obstructed:
        rep.verdict = "obstructed"
        return rep
    inside, outside = split_hamiltonian(model, regions)
    hole_counts = []
    for r in regions:
        terms = [t for t in inside if set(plaquette_sites(*t.anchor)) <= set(r.S)]
        hole_counts.append(_count(_sub_model(model, terms, r.S)))
    rep.hole_counts = hole_counts
    free = [s for s in model.sites if not any(s in r.S for r in regions)]
    rep.interior_count = int(np.prod(hole_counts)) * model.total_dim(free)
    ext_model = _sub_model(model, outside)
    rep.coarse = coarse_grain(ext_model)
    rep.exterior_count = _count(ext_model)
    if total:
        rep.total_count = _count(model)
    ok = rep.exterior_count >= 1 and all(c >= 1 for c in hole_counts)
    rep.verdict = "zero state" if ok else "no zero state"
    return rep


# column-interval witnesses ------------------------------------------------------

def column_intervals(model: LatticeModel, regions: Sequence[RegionSpec], C: int) -> list:
    """Maximal vertical runs of column ``C`` avoiding every hole interior."""
    blocked = set().union(*[set(r.I) for r in regions]) if regions else set()
    runs, cur = [], []
    for s in model.column(C):
        if s in blocked:
            if cur:
                runs.append(cur)
            cur = []
        else:
            cur.append(s)
    if cur:
        runs.append(cur)
    return runs


def _interval_projectors(model: LatticeModel, C: int, interval: list, seed: int) -> list:
    terms = [t.P for t in model.terms
             if set(t.P.support) & set(interval) and C - 1 <= t.anchor[0] <= C]
    if not terms:
        return [LocalOperator.identity(interval, [model.dims[s] for s in interval])]
    alg = interaction_algebra(terms, interval, {s: model.dims[s] for s in interval})
    dec = minimal_central_projectors(alg, seed)
    return [LocalOperator(alg.support, alg.dims, p) for p in dec.matrices()]


def _count_with(model: LatticeModel, column_ops: dict) -> float:
    """``tr(prod_C P_C prod_Z P_Z)`` by column transfer."""
    rho = LocalOperator.identity(model.column(0), model.column_dims(0))
    if 0 in column_ops:
        rho = rho @ column_ops[0]
    for C in range(model.Lx - 1):
        W = window_operator(model, C)
        if C + 1 in column_ops:
            W = W @ column_ops[C + 1].expand(W.support, W.site_dims)
        rho = partial_trace(rho.expand(W.support, W.site_dims) @ W, model.column(C + 1))
    return rho.trace().real


@dataclass
class IntervalWitness:
    witness: Witness | None
    verdict: str
    assignment: dict
    count: float
    brute_count: int
    searched: int

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "assignment": {str(k): v for k, v in self.assignment.items()},
                "count": self.count, "brute_count": self.brute_count, "searched": self.searched,
                "witness": None if self.witness is None else self.witness.to_dict()}


def column_interval_witness(model: LatticeModel, holes: Sequence[Sequence], columns: Sequence[int],
                            seed: int = 0, max_tuples: int = 4096) -> IntervalWitness:
    """Witness for the exterior Hamiltonian from per-interval central projectors.

    On each chosen column the projector is a product over intervals of one
    minimal central projector each; the assignment is found by exhaustive
    search, scored by the projected zero-energy count.
    """
    regions = [boundary_of(model, h) for h in holes]
    _check_disjoint(regions)
    _, outside = split_hamiltonian(model, regions)
    ext = _sub_model(model, outside)
    choices = []
    for C in columns:
        for a, interval in enumerate(column_intervals(ext, regions, C)):
            choices.append(((C, a), _interval_projectors(ext, C, interval, seed)))
    sizes = [len(p) for _, p in choices]
    total = int(np.prod(sizes)) if sizes else 1
    if total > max_tuples:
        raise ResourceError(f"{total} assignments exceed the search cap {max_tuples}")
    brute = _count(ext)
    best = None
    searched = 0
    for pick in itertools.product(*[range(n) for n in sizes]):
        searched += 1
        ops = {}
        for ((C, _), projs), k in zip(choices, pick):
            p = projs[k].expand(ext.column(C), {s: ext.dims[s] for s in ext.column(C)})
            ops[C] = p if C not in ops else ops[C] @ p
        n = _count_with(ext, ops)
        if n > 0.5:
            best = (pick, ops, n)
            break
    if best is None:
        return IntervalWitness(None, "no zero state", {}, 0.0, brute, searched)
    pick, ops, n = best
    for C in columns:
        # a column lying inside hole interiors carries no exterior term: identity
        ops.setdefault(C, LocalOperator.identity(ext.column(C), ext.column_dims(C)))
    entries = {C: column_mpo(ops[C], ext, C) for C in sorted(ops)}
    assignment = {key: int(k) for (key, _), k in zip(choices, pick)}
    w = Witness(entries, sorted(entries))
    return IntervalWitness(w, "zero state", assignment, float(n), brute, searched)


def verify_interval_witness(model: LatticeModel, holes: Sequence[Sequence], result: IntervalWitness):
    regions = [boundary_of(model, h) for h in holes]
    _, outside = split_hamiltonian(model, regions)
    return verify_witness(_sub_model(model, outside), result.witness)
