"""Dense operators with explicit site support.

Every operator carries the ordered list of sites it acts on together with the
local dimension of each site.  Sites are sorted canonically; for lattice sites
``(x, y)`` this is column-major order (horizontal coordinate first).
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

DENSE_CAP = int(os.environ.get("CENTRAL_MPO_CAP", 16384))
EIGEN_CAP = 4096


class ResourceError(RuntimeError):
    """A dimension cap was exceeded."""


def site_key(site):
    # ints, strings and coordinate tuples may be mixed in one support
    if isinstance(site, tuple):
        return (0, site)
    if isinstance(site, (int, np.integer)):
        return (1, (int(site),))
    return (2, (str(site),))


def canonical_sites(sites: Iterable) -> tuple:
    return tuple(sorted(set(sites), key=site_key))


def permute_operator(matrix: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: new factor ``k`` is old factor ``perm[k]``."""
    n = len(dims)
    if list(perm) == list(range(n)):
        return matrix
    d = int(np.prod(dims))
    t = matrix.reshape(tuple(dims) * 2)
    t = t.transpose(list(perm) + [n + p for p in perm])
    return t.reshape(d, d)


@dataclass(frozen=True, eq=False)
class LocalOperator:
    support: tuple
    dims: tuple
    matrix: np.ndarray

    def __post_init__(self):
        support = tuple(self.support)
        dims = tuple(int(d) for d in self.dims)
        if len(support) != len(dims):
            raise ValueError("support and dims differ in length")
        if len(set(support)) != len(support):
            raise ValueError("support sites must be distinct")
        matrix = np.asarray(self.matrix, dtype=complex)
        d = int(np.prod(dims)) if dims else 1
        if matrix.shape != (d, d):
            raise ValueError(f"matrix shape {matrix.shape} does not match dims {dims}")
        order = sorted(range(len(support)), key=lambda k: site_key(support[k]))
        if order != list(range(len(support))):
            matrix = permute_operator(matrix, dims, order)
            support = tuple(support[k] for k in order)
            dims = tuple(dims[k] for k in order)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def identity(cls, support, dims) -> "LocalOperator":
        d = int(np.prod(dims)) if len(dims) else 1
        return cls(tuple(support), tuple(dims), np.eye(d, dtype=complex))

    @classmethod
    def from_factors(cls, factors: dict, dims: dict) -> "LocalOperator":
        """Tensor product of single-site matrices, ``factors[site] = matrix``."""
        sites = canonical_sites(factors)
        mat = reduce(np.kron, [np.asarray(factors[s], dtype=complex) for s in sites], np.eye(1))
        return cls(sites, tuple(dims[s] for s in sites), mat)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def site_dims(self) -> dict:
        return dict(zip(self.support, self.dims))

    def expand(self, support: Sequence, dims: Sequence[int] | dict | None = None) -> "LocalOperator":
        """Embed into a larger support, tensoring identity on the new sites."""
        lookup = dict(self.site_dims)
        if isinstance(dims, dict):
            lookup.update(dims)
        elif dims is not None:
            lookup.update(zip(support, dims))
        target = canonical_sites(list(support) + list(self.support))
        extra = [s for s in target if s not in self.site_dims]
        if not extra:
            return self
        dext = int(np.prod([lookup[s] for s in extra]))
        if self.dim * dext > DENSE_CAP:
            raise ResourceError(f"dense embedding of dimension {self.dim * dext} exceeds cap {DENSE_CAP}")
        mat = np.kron(self.matrix, np.eye(dext))
        order_now = list(self.support) + extra
        dims_now = [lookup[s] for s in order_now]
        perm = [order_now.index(s) for s in target]
        return LocalOperator(target, tuple(lookup[s] for s in target), permute_operator(mat, dims_now, perm))

    def _aligned(self, other: "LocalOperator"):
        lookup = {**self.site_dims, **other.site_dims}
        sites = canonical_sites(list(self.support) + list(other.support))
        dims = [lookup[s] for s in sites]
        return self.expand(sites, dims), other.expand(sites, dims)

    def __matmul__(self, other: "LocalOperator") -> "LocalOperator":
        a, b = self._aligned(other)
        return LocalOperator(a.support, a.dims, a.matrix @ b.matrix)

    def __add__(self, other: "LocalOperator") -> "LocalOperator":
        a, b = self._aligned(other)
        return LocalOperator(a.support, a.dims, a.matrix + b.matrix)

    def __sub__(self, other: "LocalOperator") -> "LocalOperator":
        a, b = self._aligned(other)
        return LocalOperator(a.support, a.dims, a.matrix - b.matrix)

    def __mul__(self, scalar) -> "LocalOperator":
        return LocalOperator(self.support, self.dims, self.matrix * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "LocalOperator":
        return self * -1

    def dag(self) -> "LocalOperator":
        return LocalOperator(self.support, self.dims, self.matrix.conj().T)

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix))

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def to_dict(self) -> dict:
        flat = self.matrix.reshape(-1)
        return {
            "support": [list(s) if isinstance(s, tuple) else s for s in self.support],
            "dims": list(self.dims),
            "matrix": np.stack([flat.real, flat.imag], axis=1).tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LocalOperator":
        support = tuple(tuple(s) if isinstance(s, list) else s for s in data["support"])
        dims = tuple(data["dims"])
        d = int(np.prod(dims)) if dims else 1
        pairs = np.asarray(data["matrix"], dtype=float)
        if pairs.shape != (d * d, 2):
            raise ValueError(f"matrix entry count {pairs.shape} does not match dims {dims}")
        return cls(support, dims, (pairs[:, 0] + 1j * pairs[:, 1]).reshape(d, d))

    def __repr__(self):
        return f"LocalOperator(support={self.support}, dims={self.dims})"


def commutator(a: LocalOperator, b: LocalOperator) -> LocalOperator:
    return a @ b - b @ a


def anticommutator(a: LocalOperator, b: LocalOperator) -> LocalOperator:
    return a @ b + b @ a


def partial_trace(op: LocalOperator, keep: Sequence) -> LocalOperator:
    """Trace out every support site not listed in ``keep``."""
    keep = canonical_sites(keep)
    bad = [s for s in keep if s not in op.site_dims]
    if bad:
        raise ValueError(f"sites {bad} are not in the operator support")
    n = len(op.support)
    t = op.matrix.reshape(op.dims * 2)
    kept = [k for k, s in enumerate(op.support) if s in keep]
    letters = [chr(ord("a") + k) for k in range(2 * n)]
    for k in range(n):
        if k not in kept:
            letters[n + k] = letters[k]
    out = "".join(letters[k] for k in kept) + "".join(letters[n + k] for k in kept)
    res = np.einsum("".join(letters) + "->" + out, t)
    dk = int(np.prod([op.dims[k] for k in kept])) if kept else 1
    return LocalOperator(keep, tuple(op.dims[k] for k in kept), res.reshape(dk, dk))


def operator_schmidt(op: LocalOperator, region: Sequence, tol: float = 1e-12):
    """Split ``op`` as ``sum_k A_k (x) B_k`` with ``A_k`` on ``region``.

    Returns ``(left, right)`` lists of LocalOperators; left factors are
    Hilbert-Schmidt orthonormal, right factors carry the singular values.
    """
    region = [s for s in op.support if s in set(region)]
    rest = [s for s in op.support if s not in set(region)]
    lookup = op.site_dims
    if not rest:
        n = op.norm()
        if n <= tol:
            return [], []
        return [op * (1.0 / n)], [LocalOperator((), (), np.array([[n]]))]
    if not region:
        return [LocalOperator((), (), np.eye(1))], [op]
    dr = [lookup[s] for s in region]
    dc = [lookup[s] for s in rest]
    perm = [op.support.index(s) for s in region + rest]
    mat = permute_operator(op.matrix, [lookup[s] for s in op.support], perm)
    a, b = int(np.prod(dr)), int(np.prod(dc))
    # realign (a b) x (a b) -> (a a) x (b b)
    m = mat.reshape(a, b, a, b).transpose(0, 2, 1, 3).reshape(a * a, b * b)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    keep = s > tol * max(1.0, s[0] if len(s) else 0.0)
    left = [LocalOperator(tuple(region), tuple(dr), u[:, k].reshape(a, a)) for k in np.flatnonzero(keep)]
    right = [LocalOperator(tuple(rest), tuple(dc), s[k] * vh[k].reshape(b, b)) for k in np.flatnonzero(keep)]
    return left, right


PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_operator(paulis: dict, sign: complex = 1.0) -> LocalOperator:
    """``paulis`` maps site -> one of 'I','X','Y','Z'."""
    op = LocalOperator.from_factors({s: PAULI[p] for s, p in paulis.items()}, {s: 2 for s in paulis})
    return op * sign


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (a + a.conj().T) / 2


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def fuse_sites(op: LocalOperator, fusion: dict, dims: dict) -> LocalOperator:
    """Rewrite ``op`` on fused sites.

    ``fusion`` maps each new site to the ordered list of old sites it holds;
    ``dims`` gives old-site dimensions.  Only new sites touched by ``op`` are
    kept in the result.
    """
    owner = {old: new for new, olds in fusion.items() for old in olds}
    touched = canonical_sites(owner[s] for s in op.support)
    order = [old for new in touched for old in fusion[new]]
    full = op.expand(order, {s: dims[s] for s in order})
    perm = [full.support.index(s) for s in order]
    mat = permute_operator(full.matrix, full.dims, perm)
    new_dims = tuple(int(np.prod([dims[s] for s in fusion[new]])) for new in touched)
    return LocalOperator(touched, new_dims, mat)


def embed_factor(op: LocalOperator, sites: Sequence, dims: dict) -> np.ndarray:
    """Dense matrix of ``op`` on ``sites`` in the given (not canonical) order."""
    full = op.expand(sites, {s: dims[s] for s in sites})
    perm = [full.support.index(s) for s in sites]
    return permute_operator(full.matrix, full.dims, perm)


def ordered_operator(mat: np.ndarray, sites: Sequence, dims: dict) -> LocalOperator:
    """LocalOperator from a matrix whose factors follow ``sites`` (any order)."""
    sites = list(sites)
    target = canonical_sites(sites)
    perm = [sites.index(s) for s in target]
    return LocalOperator(target, tuple(dims[s] for s in target),
                         permute_operator(mat, [dims[s] for s in sites], perm))


def commutator_residual(f: LocalOperator, q: LocalOperator) -> float:
    """``||[f, q]|| / (||f|| ||q||_op)`` in Hilbert-Schmidt norm on the joint support.

    The ratio does not depend on how far the operators are padded with
    identities, so it is evaluated on ``supp f`` only: ``q`` is split across
    ``supp q \\ supp f`` with orthonormal outer factors.
    """
    shared = [s for s in q.support if s in f.site_dims]
    if not shared:
        return 0.0
    nf = f.norm()
    nq = float(np.linalg.norm(q.matrix, 2))
    if nf == 0.0 or nq == 0.0:
        return 0.0
    outer = [s for s in q.support if s not in f.site_dims]
    outer_ops, inner_ops = operator_schmidt(q, outer)
    d_out = int(np.prod([q.site_dims[s] for s in outer])) if outer else 1
    total = 0.0
    for a in inner_ops:
        a = a.expand(f.support, f.site_dims)
        c = f.matrix @ a.matrix - a.matrix @ f.matrix
        total += float(np.linalg.norm(c)) ** 2
    return float(np.sqrt(total) / (nf * np.sqrt(d_out) * nq))
