"""Finite-dimensional operator algebras: closure, interaction algebras,
centers, minimal central projectors and tensor factorization of blocks."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Sequence

import numpy as np

from .operators import (
    LocalOperator,
    ResourceError,
    canonical_sites,
    operator_schmidt,
    partial_trace,
)

ALGEBRA_CAP = 2**20
ORTHO_TOL = 1e-10
NULL_TOL = 1e-9
GAP = 1e-6


class DegeneracyError(RuntimeError):
    pass


class FactorizationError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class OperatorAlgebra:
    support: tuple
    dims: tuple
    basis: np.ndarray  # (k, d, d), Hilbert-Schmidt orthonormal
    closed: bool = True
    generators: np.ndarray | None = None
    trivial: bool = False  # set when built from a disjoint region

    @property
    def d(self) -> int:
        return int(np.prod(self.dims)) if self.dims else 1

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def elements(self) -> list[LocalOperator]:
        return [LocalOperator(self.support, self.dims, b) for b in self.basis]

    def gens(self) -> np.ndarray:
        return self.basis if self.generators is None else self.generators

    def residual(self, op: LocalOperator | np.ndarray) -> float:
        """Distance of ``op`` from the span of the basis."""
        mat = op.matrix if isinstance(op, LocalOperator) else op
        v = mat.reshape(-1)
        B = self.basis.reshape(self.dim, -1)
        return float(np.linalg.norm(v - B.T @ (B.conj() @ v)))

    def coefficients(self, mat: np.ndarray) -> np.ndarray:
        return self.basis.reshape(self.dim, -1).conj() @ mat.reshape(-1)

    def closure_residual(self) -> float:
        prods = np.einsum("iab,jbc->ijac", self.basis, self.basis).reshape(-1, self.d * self.d)
        B = self.basis.reshape(self.dim, -1)
        res = prods - (prods @ B.conj().T) @ B
        return float(np.max(np.linalg.norm(res, axis=1))) if len(res) else 0.0

    def star_residual(self) -> float:
        adj = self.basis.conj().transpose(0, 2, 1).reshape(self.dim, -1)
        B = self.basis.reshape(self.dim, -1)
        res = adj - (adj @ B.conj().T) @ B
        return float(np.max(np.linalg.norm(res, axis=1))) if len(res) else 0.0

    def orthonormality_residual(self) -> float:
        B = self.basis.reshape(self.dim, -1)
        return float(np.max(np.abs(B.conj() @ B.T - np.eye(self.dim))))

    def restrict(self, projector: np.ndarray) -> "OperatorAlgebra":
        """The algebra ``P A P`` (unital on the range of ``P``)."""
        mats = np.einsum("ab,kbc,cd->kad", projector, self.basis, projector)
        basis = _orthonormalize(mats.reshape(len(mats), -1)).reshape(-1, self.d, self.d)
        return OperatorAlgebra(self.support, self.dims, basis, True)


@dataclass(frozen=True, eq=False)
class CentralDecomposition:
    projectors: list
    block_dims: list
    labels: list
    seed: int = 0

    def __len__(self):
        return len(self.projectors)

    def matrices(self) -> list[np.ndarray]:
        return [p.matrix for p in self.projectors]


@dataclass(frozen=True, eq=False)
class BlockFactorization:
    block: int
    iso: np.ndarray  # columns: orthonormal basis of range(P), ordered (left, right)
    dims: tuple

    def to_factors(self, mat: np.ndarray) -> np.ndarray:
        """Matrix of ``mat`` restricted to the block, in the factorized basis."""
        return self.iso.conj().T @ mat @ self.iso


def _orthonormalize(candidates: np.ndarray, basis: np.ndarray | None = None, tol: float = ORTHO_TOL) -> np.ndarray:
    """Orthonormal rows spanning the part of ``candidates`` outside ``basis``."""
    if candidates.size == 0:
        return candidates.reshape(0, candidates.shape[-1] if candidates.ndim == 2 else 0)
    norms = np.linalg.norm(candidates, axis=1)
    c = candidates[norms > tol]
    if len(c) == 0:
        return np.zeros((0, candidates.shape[1]), dtype=complex)
    c = c / np.linalg.norm(c, axis=1)[:, None]
    for _ in range(2):
        if basis is not None and len(basis):
            c = c - (c @ basis.conj().T) @ basis
    if np.max(np.linalg.norm(c, axis=1)) <= tol:
        return np.zeros((0, candidates.shape[1]), dtype=complex)
    _, s, vh = np.linalg.svd(c, full_matrices=False)
    new = vh[s > tol]
    if basis is not None and len(basis) and len(new):
        new = new - (new @ basis.conj().T) @ basis
        q, r = np.linalg.qr(new.T)
        new = q.T[np.abs(np.diag(r)) > tol]
    return new


def hs_orthonormalize(ops: Sequence[LocalOperator], tol: float = ORTHO_TOL) -> list[LocalOperator]:
    """Gram-Schmidt in operator space, preserving input order."""
    ops = list(ops)
    if not ops:
        return []
    sites = canonical_sites([s for o in ops for s in o.support])
    lookup = {}
    for o in ops:
        lookup.update(o.site_dims)
    dims = [lookup[s] for s in sites]
    out: list[np.ndarray] = []
    for o in ops:
        v = o.expand(sites, dims).matrix.reshape(-1).copy()
        for _ in range(2):
            for b in out:
                v -= (b.conj() @ v) * b
        n = np.linalg.norm(v)
        if n > tol:
            out.append(v / n)
    d = int(np.prod(dims))
    return [LocalOperator(sites, tuple(dims), v.reshape(d, d)) for v in out]


def _as_array(ops, sites, dims) -> np.ndarray:
    d = int(np.prod(dims)) if dims else 1
    mats = [o.expand(sites, dims).matrix if isinstance(o, LocalOperator) else o for o in ops]
    return np.array(mats, dtype=complex).reshape(-1, d, d)


def algebra_from_arrays(gens: np.ndarray, support, dims, cap: int = ALGEBRA_CAP, unital: bool = True) -> OperatorAlgebra:
    d = int(np.prod(dims)) if dims else 1
    gens = np.asarray(gens, dtype=complex).reshape(-1, d, d)
    gens = np.concatenate([gens, gens.conj().transpose(0, 2, 1)]) if len(gens) else gens
    seed = [np.eye(d, dtype=complex)] if unital else []
    start = np.concatenate([np.array(seed).reshape(-1, d, d), gens])
    basis = _orthonormalize(start.reshape(len(start), -1))
    # generators with negligible norm carry no information
    gnorm = np.linalg.norm(gens.reshape(len(gens), -1), axis=1) if len(gens) else np.zeros(0)
    gens = gens[gnorm > ORTHO_TOL]
    frontier = basis
    while len(frontier) and len(gens):
        F = frontier.reshape(-1, d, d)
        cand = np.einsum("kab,gbc->kgac", F, gens).reshape(-1, d * d)
        new = _orthonormalize(cand, basis)
        if len(new) == 0:
            break
        basis = np.concatenate([basis, new])
        if len(basis) > cap:
            raise ResourceError(f"algebra dimension exceeds cap {cap}")
        frontier = new
    return OperatorAlgebra(tuple(support), tuple(dims), basis.reshape(-1, d, d), True,
                           generators=gens if len(gens) else None)


def generate_algebra(generators: Sequence[LocalOperator], support: Sequence, dims=None,
                     cap: int = ALGEBRA_CAP) -> OperatorAlgebra:
    """Smallest unital *-closed algebra on ``support`` containing ``generators``."""
    sites = canonical_sites(support)
    lookup = {}
    for g in generators:
        lookup.update(g.site_dims)
    if isinstance(dims, dict):
        lookup.update(dims)
    elif dims is not None:
        lookup.update(zip(sites, dims))
    for g in generators:
        if not set(g.support) <= set(sites):
            raise ValueError(f"generator support {g.support} not inside {sites}")
    dims = tuple(lookup[s] for s in sites)
    return algebra_from_arrays(_as_array(generators, sites, dims), sites, dims, cap)


def full_algebra(support, dims) -> OperatorAlgebra:
    d = int(np.prod(dims)) if dims else 1
    basis = np.eye(d * d, dtype=complex).reshape(d * d, d, d)
    return OperatorAlgebra(tuple(support), tuple(dims), basis, True, generators=basis)


def trivial_algebra(support, dims, flagged: bool = False) -> OperatorAlgebra:
    d = int(np.prod(dims)) if dims else 1
    return OperatorAlgebra(tuple(support), tuple(dims), np.eye(d, dtype=complex)[None] / np.sqrt(d), True,
                           trivial=flagged)


def interaction_algebra(source, region: Sequence, dims=None, cap: int = ALGEBRA_CAP) -> OperatorAlgebra:
    """Interaction algebra of an operator, operator list or algebra on ``region``.

    The algebra generated by ``tr_{region^c}(O Q)`` over all ``O`` in the
    source and all ``Q`` on the complement equals the algebra generated by the
    region-side operator-Schmidt factors of the source's generators.
    """
    if isinstance(source, OperatorAlgebra):
        ops = [LocalOperator(source.support, source.dims, g) for g in source.gens()]
    elif isinstance(source, LocalOperator):
        ops = [source]
    else:
        ops = list(source)
    lookup = {}
    for o in ops:
        lookup.update(o.site_dims)
    if isinstance(dims, dict):
        lookup.update(dims)
    region = canonical_sites(region)
    supported = {s for o in ops for s in o.support}
    touched = [s for s in region if s in supported]
    if dims is not None and not isinstance(dims, dict):
        lookup.update(zip(region, dims))
    rdims = tuple(lookup.get(s) for s in region)
    if None in rdims:
        raise ValueError("region dimensions unknown; pass dims")
    if not touched:
        return trivial_algebra(region, rdims, flagged=True)
    factors = []
    for o in ops:
        left, _ = operator_schmidt(o, region)
        factors.extend(left)
    return algebra_from_arrays(_as_array(factors, region, rdims), region, rdims, cap)


def interaction_algebra_sweep(source: Sequence[LocalOperator], region: Sequence, dims=None) -> OperatorAlgebra:
    """Brute-force variant: sweep ``Q`` over a complete operator basis of the complement."""
    ops = list(source)
    lookup = {}
    for o in ops:
        lookup.update(o.site_dims)
    if isinstance(dims, dict):
        lookup.update(dims)
    region = canonical_sites(region)
    rdims = tuple(lookup[s] for s in region)
    gens = []
    for o in ops:
        comp = [s for s in o.support if s not in set(region)]
        cd = [lookup[s] for s in comp]
        dc = int(np.prod(cd)) if cd else 1
        for k in range(dc * dc):
            q = np.zeros(dc * dc, dtype=complex)
            q[k] = 1.0
            Q = LocalOperator(tuple(comp), tuple(cd), q.reshape(dc, dc))
            gens.append(partial_trace(o @ Q, [s for s in o.support if s in set(region)]))
    return generate_algebra(gens, region, rdims)


def commutant(alg: OperatorAlgebra, within: OperatorAlgebra | None = None, tol: float = NULL_TOL) -> OperatorAlgebra:
    """Elements of ``within`` (default: all operators) commuting with ``alg``."""
    d = alg.d
    gens = alg.gens()
    if within is None:
        # [X, g] = 0  <=>  (g^T (x) 1 - 1 (x) g) vec_row(X) = 0, stacked over g
        I = np.eye(d)
        if len(gens) * d ** 4 > 2 ** 26:
            null = _gram_null_space(gens, d, tol)
        else:
            blocks = [np.kron(I, g.T) - np.kron(g, I) for g in gens]
            M = np.concatenate(blocks) if blocks else np.zeros((1, d * d))
            null = _null_space(M, tol)
        basis = null.T.reshape(-1, d, d)
        basis = _orthonormalize(basis.reshape(len(basis), -1)).reshape(-1, d, d)
        return OperatorAlgebra(alg.support, alg.dims, basis, True)
    return _commuting_subspace(within, gens, tol)


def _commuting_subspace(within: OperatorAlgebra, gens: np.ndarray, tol: float) -> OperatorAlgebra:
    d = within.d
    k = within.dim
    cols = []
    for g in gens:
        c = np.einsum("kab,bc->kac", within.basis, g) - np.einsum("ab,kbc->kac", g, within.basis)
        cols.append(c.reshape(k, -1).T)
    if not cols:
        return within
    M = np.concatenate(cols)
    null = _null_space(M, tol)
    mats = (null.T @ within.basis.reshape(k, -1)).reshape(-1, d, d)
    basis = _orthonormalize(mats.reshape(len(mats), -1)).reshape(-1, d, d)
    return OperatorAlgebra(within.support, within.dims, basis, True)


def _gram_null_space(gens: np.ndarray, d: int, tol: float) -> np.ndarray:
    """Commutant null space from the accumulated Gram matrix (one generator at a time)."""
    flat = gens.reshape(len(gens), -1)
    _, s, vh = np.linalg.svd(flat, full_matrices=False)
    gens = vh[s > ORTHO_TOL * max(1.0, s[0])].reshape(-1, d, d)  # independent span only
    I = np.eye(d)
    G = np.zeros((d * d, d * d), dtype=complex)
    for g in gens:
        m = np.kron(I, g.T) - np.kron(g, I)
        G += m.conj().T @ m
    w, v = np.linalg.eigh(G)
    return v[:, w <= max(tol, 1e-7) ** 2 * max(1.0, d)]


def _null_space(M: np.ndarray, tol: float) -> np.ndarray:
    n = M.shape[1]
    if M.shape[0] > 4 * n:
        # tall: reduce through the Gram matrix, then confirm on M itself
        G = M.conj().T @ M
        w, v = np.linalg.eigh(G)
        cand = v[:, w <= max(tol, 1e-7) ** 2 * max(1.0, n)]
        if cand.shape[1] == 0:
            return cand
        r = np.linalg.norm(M @ cand, axis=0)
        _, s, vh = np.linalg.svd(M @ cand, full_matrices=False)
        if vh.shape[0] < cand.shape[1]:
            _, s, vh = np.linalg.svd(M @ cand, full_matrices=True)
        s = np.concatenate([s, np.zeros(cand.shape[1] - len(s))])
        return cand @ vh.conj().T[:, s <= tol] if r.max() > tol else cand
    _, s, vh = np.linalg.svd(M, full_matrices=M.shape[0] < n)
    s = np.concatenate([s, np.zeros(n - len(s))])
    return vh.conj().T[:, s <= tol]


def center(alg: OperatorAlgebra, tol: float = NULL_TOL) -> OperatorAlgebra:
    """Elements of ``alg`` commuting with every element (null space of the
    stacked commutator map on the algebra's span)."""
    gens = alg.gens()
    if _pairwise_commute(gens):
        return alg
    return _commuting_subspace(alg, gens, tol)


def _pairwise_commute(gens: np.ndarray, tol: float = 1e-12) -> bool:
    if len(gens) > 64:
        return False
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            if np.linalg.norm(gens[i] @ gens[j] - gens[j] @ gens[i]) > tol:
                return False
    return True


def _hermitian_basis(alg: OperatorAlgebra) -> np.ndarray:
    b = alg.basis
    herm = np.concatenate([(b + b.conj().transpose(0, 2, 1)) / 2, (b - b.conj().transpose(0, 2, 1)) / 2j])
    flat = herm.reshape(len(herm), -1)
    # orthonormalize over the reals to keep elements Hermitian
    re = np.concatenate([flat.real, flat.imag], axis=1)
    norms = np.linalg.norm(re, axis=1)
    re = re[norms > ORTHO_TOL]
    if len(re) == 0:
        return np.zeros((0, alg.d, alg.d), dtype=complex)
    _, s, vh = np.linalg.svd(re, full_matrices=False)
    vh = vh[s > ORTHO_TOL * max(1.0, s[0])]
    n = alg.d * alg.d
    return (vh[:, :n] + 1j * vh[:, n:]).reshape(-1, alg.d, alg.d)


def spectral_clusters(w: np.ndarray, gap: float = GAP):
    """Split sorted eigenvalues into clusters; flag gaps near the threshold."""
    idx = [0]
    ambiguous = False
    for k in range(1, len(w)):
        g = w[k] - w[k - 1]
        if gap / 10 < g < gap * 10:
            ambiguous = True
        if g > gap:
            idx.append(k)
    idx.append(len(w))
    return [(idx[k], idx[k + 1]) for k in range(len(idx) - 1)], ambiguous


def minimal_central_projectors(alg: OperatorAlgebra, seed: int = 0, retries: int = 8,
                               unit: np.ndarray | None = None) -> CentralDecomposition:
    """Spectral projectors of a random Hermitian central element."""
    Z = center(alg)
    H = _hermitian_basis(Z)
    d = alg.d
    if unit is None:
        unit = np.eye(d)
    for attempt in range(retries + 1):
        s = seed + attempt
        rng = np.random.default_rng(s)
        coeffs = rng.standard_normal(len(H))
        h = np.einsum("k,kab->ab", coeffs, H)
        h = (h + h.conj().T) / 2
        w, v = np.linalg.eigh(h)
        clusters, ambiguous = spectral_clusters(w)
        if ambiguous:
            continue
        projs = []
        for a, b in clusters:
            p = v[:, a:b] @ v[:, a:b].conj().T
            # drop the part outside the algebra's unit (non-unital restrictions)
            if np.linalg.norm(unit @ p - p) > 1e-6:
                if np.linalg.norm(unit @ p) < 1e-6:
                    continue
            projs.append(p)
        projs = [p for p in projs if alg.residual(p) < 1e-6 * max(1.0, np.sqrt(d))]
        projs.sort(key=lambda p: (-int(round(np.trace(p).real)), _first_index(p)))
        ops = [LocalOperator(alg.support, alg.dims, p) for p in projs]
        return CentralDecomposition(ops, [int(round(np.trace(p).real)) for p in projs],
                                    list(range(len(projs))), s)
    raise DegeneracyError(f"ambiguous central spectrum after {retries} retries")


def _first_index(p: np.ndarray) -> int:
    diag = np.abs(np.diag(p))
    return int(np.argmax(diag > 1e-8))


def _generic_element(alg: OperatorAlgebra, rng) -> np.ndarray:
    c = rng.standard_normal(alg.dim) + 1j * rng.standard_normal(alg.dim)
    return np.einsum("k,kab->ab", c, alg.basis)


def matrix_units(alg: OperatorAlgebra, projector: np.ndarray, seed: int = 0):
    """Matrix units ``E_{i1}`` of the simple algebra ``P A P``.

    Returns ``(units, multiplicity)``; raises FactorizationError if the
    restricted algebra is not a full matrix algebra.
    """
    rng = np.random.default_rng(seed)
    sub = alg.restrict(projector)
    zc = center(sub)
    if zc.dim > 1:
        raise FactorizationError(f"restricted algebra has a center of dimension {zc.dim}")
    rank = int(round(np.trace(projector).real))
    n = int(round(np.sqrt(sub.dim)))
    if n * n != sub.dim or rank % n:
        raise FactorizationError(f"restricted algebra of dimension {sub.dim} is not M_n on rank {rank}")
    mult = rank // n
    for _ in range(8):
        h = _generic_element(sub, rng)
        h = (h + h.conj().T) / 2
        # eigenvectors inside range(P): compress h to the range first
        w, v = np.linalg.eigh(projector)
        rng_vecs = v[:, w > 0.5]
        hw, hv = np.linalg.eigh(rng_vecs.conj().T @ h @ rng_vecs)
        clusters, ambiguous = spectral_clusters(hw)
        if ambiguous or len(clusters) != n or any(b - a != mult for a, b in clusters):
            continue
        vecs = rng_vecs @ hv
        E = [vecs[:, a:b] @ vecs[:, a:b].conj().T for a, b in clusters]
        x = _generic_element(sub, rng)
        units = [E[0]]
        ok = True
        for i in range(1, n):
            u = E[i] @ x @ E[0]
            c = np.trace(u.conj().T @ u).real / mult
            if c < 1e-8:
                ok = False
                break
            units.append(u / np.sqrt(c))
        if ok:
            return units, mult
    raise FactorizationError("could not build matrix units")


def _range_basis(p: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((p + p.conj().T) / 2)
    return v[:, w > 0.5]


def block_factorize(left: OperatorAlgebra, right: OperatorAlgebra, block: LocalOperator | np.ndarray,
                    index: int = 0, seed: int = 0) -> BlockFactorization:
    """Exhibit ``range(P) = H_L (x) H_R`` with ``left`` acting on ``H_L``."""
    P = block.matrix if isinstance(block, LocalOperator) else np.asarray(block)
    lg, rg = left.gens(), right.gens()
    worst = 0.0
    for a in lg:
        for b in rg:
            worst = max(worst, np.linalg.norm(a @ b - b @ a))
    if worst > 1e-8:
        raise FactorizationError(f"left and right algebras do not commute (residual {worst:.2e})")
    units, mult = matrix_units(left, P, seed)
    f = _range_basis(units[0])
    cols = [u @ f for u in units]
    iso = np.concatenate(cols, axis=1)
    return BlockFactorization(index, iso, (len(units), mult))


def factorization_residuals(fact: BlockFactorization, left: OperatorAlgebra, right: OperatorAlgebra, P: np.ndarray):
    dl, dr = fact.dims
    res_l = res_r = 0.0
    for m in left.basis:
        t = fact.to_factors(P @ m @ P).reshape(dl, dr, dl, dr)
        core = np.einsum("arbr->ab", t) / dr
        res_l = max(res_l, np.linalg.norm(t - np.einsum("ab,rs->arbs", core, np.eye(dr))))
    for m in right.basis:
        t = fact.to_factors(P @ m @ P).reshape(dl, dr, dl, dr)
        core = np.einsum("aras->rs", t) / dl
        res_r = max(res_r, np.linalg.norm(t - np.einsum("ab,rs->arbs", np.eye(dl), core)))
    unit = np.linalg.norm(fact.iso.conj().T @ fact.iso - np.eye(fact.iso.shape[1]))
    return {"left": float(res_l), "right": float(res_r), "isometry": float(unit)}


@dataclass
class TensorFactorization:
    """``H = H_A (x) H_B`` with algebra ``A`` on the first factor and ``B`` on the second."""

    iso: np.ndarray  # unitary, columns indexed (a-index, b-index)
    dims: tuple
    multiplicities: np.ndarray = field(default=None)

    def split(self, mat: np.ndarray) -> np.ndarray:
        da, db = self.dims
        return (self.iso.conj().T @ mat @ self.iso).reshape(da, db, da, db)


@dataclass
class FactorizationObstruction:
    central: list  # central projectors of the joint algebra that block factorization
    multiplicities: np.ndarray
    joint_center_dim: int


def tensor_factorize(A: OperatorAlgebra, B: OperatorAlgebra, seed: int = 0):
    """Try to split the space so that ``A`` and ``B`` act on separate factors.

    Returns a :class:`TensorFactorization` or a :class:`FactorizationObstruction`
    carrying the joint central projectors whose multiplicity pattern forbids
    the split.
    """
    d = A.d
    da_dec = minimal_central_projectors(A, seed)
    db_dec = minimal_central_projectors(B, seed + 1)
    PA = da_dec.matrices()
    PB = db_dec.matrices()
    unitsA = [matrix_units(A, p, seed)[0] for p in PA]
    unitsB = [matrix_units(B, p, seed)[0] for p in PB]
    mA = [len(u) for u in unitsA]
    mB = [len(u) for u in unitsB]
    t = np.zeros((len(PA), len(PB)), dtype=int)
    for a, ua in enumerate(unitsA):
        for b, ub in enumerate(unitsB):
            t[a, b] = int(round(np.trace(ua[0] @ ub[0]).real))
    ka, nb = _rank_one_split(t)
    if ka is None:
        joint = []
        for a in range(len(PA)):
            for b in range(len(PB)):
                if t[a, b] > 0:
                    joint.append(LocalOperator(A.support, A.dims, PA[a] @ PB[b]))
        return FactorizationObstruction(joint, t, len(joint))
    dimA = sum(mA[a] * ka[a] for a in range(len(PA)))
    dimB = sum(mB[b] * nb[b] for b in range(len(PB)))
    iso = np.zeros((d, dimA * dimB), dtype=complex)
    offA = np.cumsum([0] + [mA[a] * ka[a] for a in range(len(PA))])
    offB = np.cumsum([0] + [mB[b] * nb[b] for b in range(len(PB))])
    for a, ua in enumerate(unitsA):
        for b, ub in enumerate(unitsB):
            g = _range_basis(ua[0] @ ub[0])  # t[a,b] vectors
            for i, Ei in enumerate(ua):
                for j, Fj in enumerate(ub):
                    vecs = Ei @ Fj @ g
                    for s in range(t[a, b]):
                        kap, nu = divmod(s, nb[b])
                        ia = offA[a] + i * ka[a] + kap
                        jb = offB[b] + j * nb[b] + nu
                        iso[:, ia * dimB + jb] = vecs[:, s]
    return TensorFactorization(iso, (dimA, dimB), t)


def _rank_one_split(t: np.ndarray):
    if np.any(t <= 0):
        return None, None
    row = t[0]
    g = 0
    for v in row:
        g = gcd(g, int(v))
    nb = row // g
    ka = t[:, 0] // nb[0]
    if np.array_equal(np.outer(ka, nb), t):
        return ka, nb
    return None, None
