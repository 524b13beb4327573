"""Matrix product operators over a chain of (possibly fused) sites.

Tensors have index order ``(left bond, right bond, row, col)``.  A site may
be a fusion of several lattice sites (a rung of a multi-column window); its
``factors`` record the fused dimensions, first column first.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .operators import DENSE_CAP, LocalOperator, ResourceError, embed_factor

DEFAULT_THRESHOLD = 1e-12
BOND_CAP = 4096


@dataclass(eq=False)
class MPO:
    tensors: list
    factors: list | None = None
    periodic: bool = False

    def __post_init__(self):
        self.tensors = [np.asarray(t, dtype=complex) for t in self.tensors]
        if not self.tensors:
            raise ValueError("an MPO needs at least one site")
        for k, t in enumerate(self.tensors):
            if t.ndim != 4:
                raise ValueError(f"tensor {k} has {t.ndim} indices, expected 4")
            nxt = self.tensors[(k + 1) % len(self.tensors)]
            if (k + 1 < len(self.tensors) or self.periodic) and t.shape[1] != nxt.shape[0]:
                raise ValueError(f"bond mismatch between sites {k} and {k + 1}")
        if not self.periodic and (self.tensors[0].shape[0] != 1 or self.tensors[-1].shape[1] != 1):
            raise ValueError("open MPO boundary bonds must have dimension 1")
        if self.factors is None:
            self.factors = [(t.shape[2],) for t in self.tensors]

    # basic properties -------------------------------------------------
    @property
    def length(self) -> int:
        return len(self.tensors)

    @property
    def bond_dims(self) -> list:
        bonds = [t.shape[1] for t in self.tensors[:-1]]
        if self.periodic:
            bonds.append(self.tensors[-1].shape[1])
        return bonds

    @property
    def max_bond(self) -> int:
        return max(self.bond_dims, default=1)

    @property
    def phys_dims(self) -> list:
        return [t.shape[2] for t in self.tensors]

    @property
    def dim(self) -> int:
        return int(np.prod(self.phys_dims))

    def copy(self) -> "MPO":
        return MPO([t.copy() for t in self.tensors], list(self.factors), self.periodic)

    # constructors -----------------------------------------------------
    @classmethod
    def identity(cls, phys_dims: Sequence[int], factors=None) -> "MPO":
        return cls([np.eye(d, dtype=complex)[None, None] for d in phys_dims], factors)

    @classmethod
    def product(cls, mats: Sequence[np.ndarray], factors=None) -> "MPO":
        return cls([np.asarray(m, dtype=complex)[None, None] for m in mats], factors)

    @classmethod
    def from_dense(cls, op, phys_dims: Sequence[int] | None = None, threshold: float = DEFAULT_THRESHOLD,
                   factors=None) -> "MPO":
        """Successive SVD splits of a dense operator (sites in the given order)."""
        if isinstance(op, LocalOperator):
            mat, phys_dims = op.matrix, list(op.dims) if phys_dims is None else phys_dims
        else:
            mat = np.asarray(op, dtype=complex)
        phys_dims = list(phys_dims)
        n = len(phys_dims)
        d = int(np.prod(phys_dims))
        if mat.shape != (d, d):
            raise ValueError(f"matrix shape {mat.shape} does not match {phys_dims}")
        if d > DENSE_CAP:
            raise ResourceError(f"dense dimension {d} exceeds cap {DENSE_CAP}")
        t = mat.reshape(phys_dims + phys_dims)
        t = t.transpose([k for j in range(n) for k in (j, n + j)])
        tensors = []
        rest = t.reshape(1, -1)
        chi = 1
        for k in range(n - 1):
            p = phys_dims[k]
            m = rest.reshape(chi * p * p, -1)
            u, s, vh = np.linalg.svd(m, full_matrices=False)
            keep = max(1, int(np.sum(s > threshold * max(s[0], 1e-300)))) if s.size and s[0] > 0 else 1
            u, s, vh = u[:, :keep], s[:keep], vh[:keep]
            tensors.append(u.reshape(chi, p, p, keep).transpose(0, 3, 1, 2))
            rest = s[:, None] * vh
            chi = keep
        p = phys_dims[-1]
        tensors.append(rest.reshape(chi, p, p, 1).transpose(0, 3, 1, 2))
        return cls(tensors, factors)

    # dense view --------------------------------------------------------
    def to_dense(self, cap: int = DENSE_CAP) -> np.ndarray:
        if self.periodic:
            return self.to_open().to_dense(cap)
        if self.dim > cap:
            raise ResourceError(f"dense dimension {self.dim} exceeds cap {cap}")
        acc = self.tensors[0][0]  # (r, p, q)
        acc = acc.transpose(1, 2, 0)  # (P, Q, r)
        for t in self.tensors[1:]:
            P, Q, _ = acc.shape
            acc = np.einsum("PQl,lrpq->PpQqr", acc, t)
            acc = acc.reshape(P * t.shape[2], Q * t.shape[3], t.shape[1])
        return acc[:, :, 0]

    def to_local(self, support: Sequence, dims: Sequence[int] | None = None) -> LocalOperator:
        return LocalOperator(tuple(support), tuple(self.phys_dims if dims is None else dims), self.to_dense())

    # arithmetic ---------------------------------------------------------
    def __matmul__(self, other: "MPO") -> "MPO":
        return multiply(self, other)

    def __add__(self, other: "MPO") -> "MPO":
        return add(self, other)

    def __sub__(self, other: "MPO") -> "MPO":
        return add(self, other * -1)

    def __mul__(self, scalar) -> "MPO":
        out = self.copy()
        out.tensors[0] = out.tensors[0] * scalar
        return out

    __rmul__ = __mul__

    def dag(self) -> "MPO":
        return MPO([t.conj().transpose(0, 1, 3, 2) for t in self.tensors], list(self.factors), self.periodic)

    def trace(self) -> complex:
        mats = [np.einsum("lrpp->lr", t) for t in self.tensors]
        acc = mats[0]
        for m in mats[1:]:
            acc = acc @ m
        return complex(np.trace(acc))

    def norm(self) -> float:
        """Hilbert-Schmidt norm via a QR sweep (no cancellation between terms)."""
        m = self.to_open() if self.periodic else self
        R = np.ones((1, 1), dtype=complex)
        for t in m.tensors[:-1]:
            t = np.einsum("ab,brpq->apqr", R, t)
            a, p, q, r = t.shape
            _, R = np.linalg.qr(t.reshape(a * p * q, r))
        last = np.einsum("ab,brpq->arpq", R, m.tensors[-1])
        return float(np.linalg.norm(last))

    def compress(self, threshold: float = DEFAULT_THRESHOLD) -> "MPO":
        return compress(self, threshold)

    def to_open(self) -> "MPO":
        """Close the periodic bond explicitly; bond dimensions become chi^2."""
        if not self.periodic:
            return self
        chi = self.tensors[0].shape[0]
        eye = np.eye(chi)
        out = []
        n = self.length
        for k, t in enumerate(self.tensors):
            if n == 1:
                out.append(np.einsum("aapq->pq", t)[None, None])
            elif k == 0:
                # carry the opening index alongside the running bond
                out.append(t.reshape(1, chi * t.shape[1], t.shape[2], t.shape[3]))
            elif k == n - 1:
                out.append(t.transpose(1, 0, 2, 3).reshape(chi * t.shape[0], 1, t.shape[2], t.shape[3]))
            else:
                x = np.einsum("ab,lrpq->albrpq", eye, t).reshape(chi * t.shape[0], chi * t.shape[1], t.shape[2], t.shape[3])
                out.append(x)
        return MPO(out, list(self.factors))

    # serialization ------------------------------------------------------
    def to_dict(self) -> dict:
        out = {
            "length": self.length,
            "phys_dims": self.phys_dims,
            "tensors": [
                {"shape": list(t.shape), "data": np.stack([t.reshape(-1).real, t.reshape(-1).imag], axis=1).tolist()}
                for t in self.tensors
            ],
        }
        if any(len(f) > 1 for f in self.factors):
            out["factors"] = [list(f) for f in self.factors]
        if self.periodic:
            out["periodic"] = True
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "MPO":
        tensors = []
        for k, entry in enumerate(data["tensors"]):
            shape = tuple(entry["shape"])
            pairs = np.asarray(entry["data"], dtype=float)
            if pairs.shape != (int(np.prod(shape)), 2):
                raise ValueError(f"tensors[{k}]: data length does not match shape {shape}")
            tensors.append((pairs[:, 0] + 1j * pairs[:, 1]).reshape(shape))
        if "length" in data and data["length"] != len(tensors):
            raise ValueError("length does not match the number of tensors")
        factors = [tuple(f) for f in data["factors"]] if "factors" in data else None
        return cls(tensors, factors, bool(data.get("periodic", False)))

    def __repr__(self):
        return f"MPO(length={self.length}, phys={self.phys_dims}, bonds={self.bond_dims})"


def _check_same_shape(a: MPO, b: MPO):
    if a.length != b.length or a.phys_dims != b.phys_dims:
        raise ValueError(f"shape mismatch: {a.phys_dims} vs {b.phys_dims}")


def multiply(a: MPO, b: MPO) -> MPO:
    """Operator product ``a @ b``; bond dimensions multiply."""
    _check_same_shape(a, b)
    if a.periodic or b.periodic:
        a, b = a.to_open(), b.to_open()
    out = []
    for ta, tb in zip(a.tensors, b.tensors):
        t = np.einsum("abpk,cdkq->acbdpq", ta, tb)
        la, ra, p, _ = ta.shape
        lb, rb, _, q = tb.shape
        out.append(t.reshape(la * lb, ra * rb, p, q))
    return MPO(out, list(a.factors))


def add(a: MPO, b: MPO) -> MPO:
    _check_same_shape(a, b)
    if a.periodic or b.periodic:
        a, b = a.to_open(), b.to_open()
    n = a.length
    if n == 1:
        return MPO([a.tensors[0] + b.tensors[0]], list(a.factors))
    out = []
    for k, (ta, tb) in enumerate(zip(a.tensors, b.tensors)):
        la, ra, p, q = ta.shape
        lb, rb, _, _ = tb.shape
        if k == 0:
            out.append(np.concatenate([ta, tb], axis=1))
        elif k == n - 1:
            out.append(np.concatenate([ta, tb], axis=0))
        else:
            t = np.zeros((la + lb, ra + rb, p, q), dtype=complex)
            t[:la, :ra] = ta
            t[la:, ra:] = tb
            out.append(t)
    return MPO(out, list(a.factors))


def compress(m: MPO, threshold: float = DEFAULT_THRESHOLD) -> MPO:
    """Right-to-left QR, then left-to-right SVD truncation (relative threshold).

    The result is left-canonical: every tensor but the last is an isometry.
    """
    if m.periodic:
        m = m.to_open()
    tensors = [t.copy() for t in m.tensors]
    n = len(tensors)
    for k in range(n - 1, 0, -1):
        t = tensors[k]
        l, r, p, q = t.shape
        mat = t.reshape(l, r * p * q)
        qm, rm = np.linalg.qr(mat.T)
        tensors[k] = qm.T.reshape(-1, r, p, q)
        tensors[k - 1] = np.einsum("lrpq,rs->lspq", tensors[k - 1], rm.T)
    for k in range(n - 1):
        t = tensors[k]
        l, r, p, q = t.shape
        mat = t.transpose(0, 2, 3, 1).reshape(l * p * q, r)
        u, s, vh = np.linalg.svd(mat, full_matrices=False)
        if s.size == 0 or s[0] == 0:
            keep = 1
        else:
            keep = max(1, int(np.sum(s > threshold * s[0])))
        u, s, vh = u[:, :keep], s[:keep], vh[:keep]
        tensors[k] = u.reshape(l, p, q, keep).transpose(0, 3, 1, 2)
        tensors[k + 1] = np.einsum("ab,bcpq->acpq", s[:, None] * vh, tensors[k + 1])
    out = MPO(tensors, list(m.factors))
    if out.max_bond > BOND_CAP:
        raise ResourceError(f"bond dimension {out.max_bond} exceeds cap {BOND_CAP}")
    return out


def inner(a: MPO, b: MPO) -> complex:
    """``tr(a^dagger b)`` by transfer-matrix contraction."""
    _check_same_shape(a, b)
    a, b = a.to_open(), b.to_open()
    E = np.ones((1, 1), dtype=complex)
    for ta, tb in zip(a.tensors, b.tensors):
        E = np.einsum("ac,abpq,cdpq->bd", E, ta.conj(), tb)
    return complex(E[0, 0])


@dataclass
class Proportionality:
    proportional: bool
    x: complex
    residual: float
    degenerate: bool = False


def proportionality(a: MPO, b: MPO, tol: float = 1e-8, floor: float = 0.0) -> Proportionality:
    """Is ``a = x b``?  ``x = tr(b^dagger a)/tr(b^dagger b)``.

    Norms at or below ``floor`` count as exact zeros (rounding noise).
    """
    _check_same_shape(a, b)
    na, nb = a.norm(), b.norm()
    scale = max(na, nb)
    if scale <= floor or scale == 0:
        return Proportionality(True, 0j, 0.0, True)
    if nb <= max(tol * scale, floor):
        return Proportionality(na <= tol * scale, 0j, na / scale, False)
    x = inner(b, a) / nb ** 2
    res = (a - b * x).norm()
    return Proportionality(res <= tol * scale, x, res / scale)


# embedding lattice operators ---------------------------------------------

def chain_mpo(op: LocalOperator, rungs: Sequence[Sequence], dims: dict,
              threshold: float = DEFAULT_THRESHOLD) -> MPO:
    """MPO of ``op`` on a chain whose sites are the fused ``rungs``."""
    index = {s: k for k, rung in enumerate(rungs) for s in rung}
    missing = [s for s in op.support if s not in index]
    if missing:
        raise ValueError(f"sites {missing} are not on the chain")
    touched = sorted({index[s] for s in op.support})
    lo, hi = (touched[0], touched[-1]) if touched else (0, 0)
    order = [s for k in range(lo, hi + 1) for s in rungs[k]]
    mat = embed_factor(op, order, dims)
    phys = [int(np.prod([dims[s] for s in rung])) for rung in rungs]
    factors = [tuple(dims[s] for s in rung) for rung in rungs]
    core = MPO.from_dense(mat, phys[lo:hi + 1], threshold)
    tensors = [np.eye(p, dtype=complex)[None, None] for p in phys[:lo]]
    tensors += core.tensors
    tensors += [np.eye(p, dtype=complex)[None, None] for p in phys[hi + 1:]]
    return MPO(tensors, factors)


def window_rungs(model, C0: int, C1: int) -> list:
    return [[(C, y) for C in range(C0, C1 + 1)] for y in range(model.Ly)]


def window_mpo(model, C0: int, C1: int | None = None, threshold: float = DEFAULT_THRESHOLD) -> MPO:
    """``P_{C0,C1}`` as an MPO over rungs, built by multiplying plaquette projectors."""
    C1 = C0 + 1 if C1 is None else C1
    rungs = window_rungs(model, C0, C1)
    phys = [int(np.prod([model.dims[s] for s in r])) for r in rungs]
    out = MPO.identity(phys, [tuple(model.dims[s] for s in r) for r in rungs])
    for t in model.window_terms(C0, C1):
        out = compress(multiply(out, chain_mpo(t.P, rungs, model.dims)), threshold)
    return out


def column_mpo(op: LocalOperator, model, C: int, threshold: float = DEFAULT_THRESHOLD) -> MPO:
    return chain_mpo(op, [[s] for s in model.column(C)], model.dims, threshold)


def column_identity(model, C: int) -> MPO:
    return MPO.identity(list(model.column_dims(C)))


def window_to_local(m: MPO, model, C0: int, C1: int) -> LocalOperator:
    """Dense window MPO as a LocalOperator in canonical site order."""
    rungs = window_rungs(model, C0, C1)
    order = [s for r in rungs for s in r]
    return LocalOperator(tuple(order), tuple(model.dims[s] for s in order), m.to_dense())


def embed_in_window(col: MPO, window: MPO, position: int) -> MPO:
    """Tensor a column MPO with identities so it acts on factor ``position`` of each rung."""
    out = []
    for t, f in zip(col.tensors, window.factors):
        before = int(np.prod(f[:position]))
        after = int(np.prod(f[position + 1:]))
        if t.shape[2] != f[position]:
            raise ValueError("column operator does not match the window factor")
        x = np.einsum("ij,lrpq,kn->lripkjqn", np.eye(before), t, np.eye(after))
        l, r = t.shape[:2]
        d = before * t.shape[2] * after
        out.append(x.reshape(l, r, d, d))
    return MPO(out, list(window.factors))


def propagate(rho: MPO, window: MPO, threshold: float = DEFAULT_THRESHOLD) -> MPO:
    """``tr_{first columns}(rho P_window)``: result lives on the last column of the window.

    ``rho`` acts on the first factor of every rung; all factors but the last
    are traced.
    """
    if rho.length != window.length:
        raise ValueError("rho and window have different lengths")
    rho, window = rho.to_open(), window.to_open()
    out = []
    for t, w, f in zip(rho.tensors, window.tensors, window.factors):
        a = f[0]
        b = f[-1]
        m = int(np.prod(f[1:-1])) if len(f) > 2 else 1
        if t.shape[2] != a:
            raise ValueError(f"rho physical dimension {t.shape[2]} does not match window factor {a}")
        l2, r2 = w.shape[:2]
        w5 = w.reshape(l2, r2, a, m, b, a, m, b)
        # R[l1 l2, r1 r2, b, b'] = sum rho[l1, r1, x, x'] W[l2, r2, (x', m, b), (x, m, b')]
        R = np.einsum("ijXY,klYMbXMc->ikjlbc", t, w5, optimize=True)
        l1, r1 = t.shape[:2]
        out.append(R.reshape(l1 * l2, r1 * r2, b, b))
    return compress(MPO(out), threshold)


def dense_propagate(rho: LocalOperator, window: LocalOperator, keep: Sequence) -> LocalOperator:
    """Reference evaluation of ``tr_{not keep}(rho P)`` with dense matrices."""
    from .operators import partial_trace
    return partial_trace(rho.expand(window.support, window.site_dims) @ window, keep)
