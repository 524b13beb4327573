"""String-net loop operators from F-symbol tables.

F entries are stored with the four-vertex index order ``F^{ijm}_{kln}``
used by the loop formula; in the usual F-move notation this is
``(F^{ijk}_l)_{mn}``: ``i, j`` fuse to ``m``, ``m, k`` to ``l``, ``j, k`` to
``n`` and ``i, n`` to ``l``.  The first label is the identity particle.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from importlib import resources
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares

from .algebra import OperatorAlgebra, commutant
from .mpo import MPO
from .operators import LocalOperator, canonical_sites, commutator, operator_schmidt, ordered_operator

ALGEBRA_DIM_CAP = 16  # largest region dimension for the center-membership check


@dataclass
class FSymbolTable:
    labels: list
    fusion: set  # admissible (a, b, c): c appears in a x b, as label indices
    F: np.ndarray  # F[i, j, m, k, l, n]
    dual: list | None = None  # index of each label's dual (default: self-dual)
    name: str = ""

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def n_types(self) -> int:
        return self.n - 1

    def index(self, label) -> int:
        label = str(label)
        if label not in [str(x) for x in self.labels]:
            raise ValueError(f"unknown label {label!r}; labels are {self.labels}")
        return [str(x) for x in self.labels].index(label)

    def star(self, a: int) -> int:
        return a if self.dual is None else self.dual[a]

    def N(self) -> np.ndarray:
        out = np.zeros((self.n,) * 3, dtype=int)
        for a, b, c in self.fusion:
            out[a, b, c] = 1
        return out

    def admissible_mask(self) -> np.ndarray:
        """Admissibility of ``F^{ijm}_{kln}``."""
        N = self.N()
        return np.einsum("ijm,mkl,jkn,inl->ijmkln", N, N, N, N).astype(bool)

    def standard(self) -> np.ndarray:
        """``S[a, b, c, d, e, f] = (F^{abc}_d)_{ef}``."""
        return self.F.transpose(0, 1, 3, 4, 2, 5)

    def quantum_dims(self) -> np.ndarray:
        # F^{aa*0}_{aa*0} = 1/d_a in the symmetric gauge
        return np.array([1.0 / self.F[a, self.star(a), 0, a, self.star(a), 0].real
                         if abs(self.F[a, self.star(a), 0, a, self.star(a), 0]) > 0 else np.nan
                         for a in range(self.n)])

    def to_dict(self) -> dict:
        mask = self.admissible_mask()
        F = {}
        for idx in zip(*np.nonzero(mask)):
            v = complex(self.F[idx])
            F[",".join(str(self.labels[k]) for k in idx)] = [v.real, v.imag]
        out = {"labels": [str(x) for x in self.labels],
               "fusion": sorted([[str(self.labels[a]), str(self.labels[b]), str(self.labels[c])]
                                 for a, b, c in self.fusion]),
               "F": F}
        if self.dual is not None:
            out["dual"] = [str(self.labels[k]) for k in self.dual]
        if self.name:
            out["name"] = self.name
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "FSymbolTable":
        labels = [str(x) for x in data["labels"]]
        pos = {x: k for k, x in enumerate(labels)}
        try:
            fusion = {(pos[str(a)], pos[str(b)], pos[str(c)]) for a, b, c in data["fusion"]}
            n = len(labels)
            F = np.zeros((n,) * 6, dtype=complex)
            for key, val in data["F"].items():
                idx = tuple(pos[x.strip()] for x in key.split(","))
                if len(idx) != 6:
                    raise ValueError(f"F key {key!r} needs six labels")
                F[idx] = complex(val[0], val[1]) if isinstance(val, (list, tuple)) else complex(val)
            dual = [pos[str(x)] for x in data["dual"]] if "dual" in data else None
        except KeyError as exc:
            raise ValueError(f"unknown label {exc.args[0]!r} in F-symbol table") from exc
        return cls(labels, fusion, F, dual, data.get("name", ""))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)

    @classmethod
    def load(cls, path) -> "FSymbolTable":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


# tables -------------------------------------------------------------------

def z2_table() -> FSymbolTable:
    fusion = {(a, b, (a + b) % 2) for a in range(2) for b in range(2)}
    t = FSymbolTable(["0", "1"], fusion, np.zeros((2,) * 6, dtype=complex), None, "Z2")
    t.F[t.admissible_mask()] = 1.0
    return t


FIBONACCI_FUSION = {(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0), (1, 1, 1)}


def fibonacci_fusion_table() -> FSymbolTable:
    return FSymbolTable(["1", "tau"], set(FIBONACCI_FUSION), np.zeros((2,) * 6, dtype=complex), None, "Fibonacci")


def fibonacci_table() -> FSymbolTable:
    """The pinned solution of the Fibonacci pentagon equations."""
    text = resources.files("central_mpo").joinpath("data/fibonacci.json").read_text()
    return FSymbolTable.from_dict(json.loads(text))


# pentagon -----------------------------------------------------------------

def pentagon_residuals(S: np.ndarray) -> np.ndarray:
    """``[F^{fcd}_e]_{gl} [F^{abl}_e]_{fk} - sum_h [F^{abc}_g]_{fh} [F^{ahd}_e]_{gk} [F^{bcd}_k]_{hl}``
    over all index values, on the standard-order array ``S``."""
    lhs = np.einsum("fcdegl,ablefk->abcdefgkl", S, S)
    rhs = np.einsum("abcgfh,ahdegk,bcdkhl->abcdefgkl", S, S, S)
    return lhs - rhs


def pentagon_check(table: FSymbolTable) -> dict:
    S = table.standard()
    res = np.abs(pentagon_residuals(S))
    idx = np.unravel_index(int(np.argmax(res)), res.shape) if res.size else ()
    mask = table.admissible_mask()
    return {"residual": float(res.max()) if res.size else 0.0,
            "worst": [str(table.labels[k]) for k in idx],
            "inadmissible_nonzero": float(np.abs(table.F[~mask]).max()) if (~mask).any() else 0.0,
            "name": table.name}


def solve_pentagon(table: FSymbolTable, starts: int = 64, seed: int = 0, tol: float = 1e-9) -> tuple:
    """Real solutions of the pentagon equations in the trivial-vertex, symmetric gauge.

    Entries with an identity among the upper three (standard-order) labels are
    fixed to 1; the rest are unknowns.  Each F-matrix is required to be
    symmetric, which fixes the remaining gauge up to signs.  Returns
    ``(solutions, log)`` with the unitary solutions first.
    """
    n = table.n
    N = table.N()
    adm = np.einsum("abe,ecd,bcf,afd->abcdef", N, N, N, N).astype(bool)
    fixed = np.zeros_like(adm)
    fixed[0] = fixed[:, 0] = fixed[:, :, 0] = True
    fixed &= adm
    free = adm & ~fixed
    free_idx = list(zip(*np.nonzero(free)))
    sym_pairs = [(i, tuple(list(i[:4]) + [i[5], i[4]])) for i in free_idx if i[4] < i[5]]

    def build(x):
        S = np.zeros((n,) * 6)
        S[fixed] = 1.0
        for v, i in zip(x, free_idx):
            S[i] = v
        return S

    def resid(x):
        S = build(x)
        sym = [S[a] - S[b] for a, b in sym_pairs]
        return np.concatenate([pentagon_residuals(S).reshape(-1), np.array(sym)])

    rng = np.random.default_rng(seed)
    found = []
    for _ in range(starts):
        x0 = rng.uniform(-1.5, 1.5, len(free_idx))
        r = least_squares(resid, x0, xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if np.abs(resid(r.x)).max() > tol:
            continue
        S = build(r.x)
        if not any(np.abs(S - T).max() < 1e-8 for T in found):
            found.append(S)
    unitary = [S for S in found if _is_unitary(S, adm)]
    rest = [S for S in found if not _is_unitary(S, adm)]
    unitary.sort(key=_canonical_key)
    log = {"starts": starts, "seed": seed, "distinct": len(found), "unitary": len(unitary)}
    return unitary + rest, log


def _is_unitary(S: np.ndarray, adm: np.ndarray) -> bool:
    n = S.shape[0]
    for a, b, c, d in itertools.product(range(n), repeat=4):
        M = S[a, b, c, d]
        rows = np.flatnonzero(adm[a, b, c, d].any(axis=1))
        cols = np.flatnonzero(adm[a, b, c, d].any(axis=0))
        if len(rows) == 0:
            continue
        sub = M[np.ix_(rows, cols)]
        if sub.shape[0] != sub.shape[1] or np.abs(sub @ sub.conj().T - np.eye(len(rows))).max() > 1e-8:
            return False
    return True


def _canonical_key(S: np.ndarray):
    # prefer nonnegative off-diagonal entries, then a lexicographic tie-break
    flat = S.reshape(-1)
    neg = int(np.sum(flat < -1e-12))
    return (neg, tuple(np.round(-flat, 10)))


def table_from_standard(template: FSymbolTable, S: np.ndarray, name: str = "") -> FSymbolTable:
    F = np.asarray(S, dtype=complex).transpose(0, 1, 4, 2, 3, 5)
    return FSymbolTable(list(template.labels), set(template.fusion), F, template.dual, name or template.name)


def solve_fibonacci(starts: int = 64, seed: int = 0) -> FSymbolTable:
    sols, log = solve_pentagon(fibonacci_fusion_table(), starts, seed)
    if not sols or log["unitary"] == 0:
        raise RuntimeError(f"no unitary Fibonacci solution found ({log})")
    return table_from_standard(fibonacci_fusion_table(), sols[0], "Fibonacci")


# loop operators -------------------------------------------------------------

@dataclass(frozen=True)
class LoopSpec:
    n: int

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("a loop needs at least 3 bonds")


def _loop_factor(table: FSymbolTable, s: int) -> np.ndarray:
    """``T[e, mu, a, a', mu'] = F^{e mu* a}_{s* a' mu'*}``."""
    n = table.n
    st = np.array([table.star(k) for k in range(n)])
    F = table.F[:, st][:, :, :, [table.star(s)]][:, :, :, 0]  # F[e, mu*, a, s*, l, n]
    F = F[:, :, :, :, st]  # last index mu'*
    return F  # indices (e, mu, a, a', mu')


def _check_s(table: FSymbolTable, s) -> int:
    return table.index(s) if not isinstance(s, (int, np.integer)) else int(s)


def b_loop_dense(table: FSymbolTable, s, loop: LoopSpec | int, cap: int = 2**24) -> np.ndarray:
    """Dense ``B^s_l`` on fused sites ``(e_a, a)``, index ``e * N + a``, site order 1..n."""
    n = loop.n if isinstance(loop, LoopSpec) else LoopSpec(int(loop)).n
    s = _check_s(table, s)
    N = table.n
    d = N ** (2 * n)
    if d > cap:
        raise ValueError(f"dense loop operator of dimension {d} exceeds cap {cap}")
    T = _loop_factor(table, s)
    dim_a = N ** n
    out = np.zeros((N,) * n + (dim_a, dim_a), dtype=complex)
    letters = "abcdefghijklmnopqrstuvwxyz"
    ins = letters[:n]
    outs = letters[n:2 * n]
    for es in itertools.product(range(N), repeat=n):
        # factor a uses (a-1, a) for both initial and final labels
        ops = []
        specs = []
        for k in range(n):
            ops.append(T[es[k]])
            specs.append(ins[k - 1] + ins[k] + outs[k] + outs[k - 1])
        t = np.einsum(",".join(specs) + "->" + outs + ins, *ops)
        out[es] = t.reshape(dim_a, dim_a)
    # place each e-block on the fused ordering (e_1 a_1, e_2 a_2, ...)
    full = np.zeros((N,) * (4 * n), dtype=complex)
    blk = out.reshape((N,) * (3 * n))
    for es in itertools.product(range(N), repeat=n):
        sl = []
        for k in range(n):
            sl += [es[k], slice(None)]
        full[tuple(sl + sl)] = blk[es]
    return full.reshape(d, d)


def b_loop_mpo(table: FSymbolTable, s, loop: LoopSpec | int) -> MPO:
    """Periodic MPO with auxiliary pairs ``(beta, beta')`` of dimension ``N^2`` per bond."""
    n = loop.n if isinstance(loop, LoopSpec) else LoopSpec(int(loop)).n
    s = _check_s(table, s)
    N = table.n
    T = _loop_factor(table, s)  # (e, mu, a, a', mu')
    W = np.zeros((N, N, N, N, N, N, N, N), dtype=complex)  # (mu, mu', nu, nu', e', a', e, a)
    for e, mu, a, ap, mup in itertools.product(range(N), repeat=5):
        W[mu, mup, a, ap, e, ap, e, a] = T[e, mu, a, ap, mup]
    W = W.reshape(N * N, N * N, N * N, N * N)
    return MPO([W.copy() for _ in range(n)], None, periodic=True)


def loop_sites(n: int) -> list:
    out = []
    for a in range(1, n + 1):
        out += [f"e{a}", f"b{a}"]
    return out


def loop_operator(table: FSymbolTable, s, n: int, bonds: Sequence | None = None,
                  legs: Sequence | None = None) -> LocalOperator:
    """``B^s_l`` as a LocalOperator on named bond sites (loop bonds and legs)."""
    bonds = [f"b{a}" for a in range(1, n + 1)] if bonds is None else list(bonds)
    legs = [f"e{a}" for a in range(1, n + 1)] if legs is None else list(legs)
    order = [x for pair in zip(legs, bonds) for x in pair]
    dims = {x: table.n for x in order}
    return ordered_operator(b_loop_dense(table, s, n), order, dims)


# a closed trivalent graph ----------------------------------------------------

@dataclass
class StringNetGraph:
    """Edges are sites; each face lists its boundary as ``[(bond, leg), ...]``
    in cyclic order, with the leg sitting between the previous bond and this one."""

    edges: list
    vertices: dict  # vertex -> three incident edges
    faces: dict  # face -> list of (bond, leg)
    name: str = ""

    def dims(self, table: FSymbolTable) -> dict:
        return {e: table.n for e in self.edges}


def prism_graph() -> StringNetGraph:
    """Triangular prism: two triangles ``u1 u2 u3`` and ``w1 w2 w3`` joined by rungs."""
    edges = ["u12", "u23", "u31", "w12", "w23", "w31", "r1", "r2", "r3"]
    vertices = {
        "u1": ("u12", "u31", "r1"), "u2": ("u12", "u23", "r2"), "u3": ("u23", "u31", "r3"),
        "w1": ("w12", "w31", "r1"), "w2": ("w12", "w23", "r2"), "w3": ("w23", "w31", "r3"),
    }
    # cycles oriented consistently as seen from outside the prism
    faces = {
        "top": [("u12", "r1"), ("u23", "r2"), ("u31", "r3")],
        "bottom": [("w31", "r1"), ("w23", "r3"), ("w12", "r2")],
        "side12": [("r1", "u31"), ("w12", "w31"), ("r2", "w23"), ("u12", "u23")],
        "side23": [("r2", "u12"), ("w23", "w12"), ("r3", "w31"), ("u23", "u31")],
        "side31": [("r3", "u23"), ("w31", "w23"), ("r1", "w12"), ("u31", "u12")],
    }
    return StringNetGraph(edges, vertices, faces, "prism")


def vertex_projector(table: FSymbolTable, edges: Sequence) -> LocalOperator:
    N = table.N()
    n = table.n
    diag = np.zeros((n, n, n))
    for a, b, c in itertools.product(range(n), repeat=3):
        # three edges meeting at a vertex fuse to the identity
        diag[a, b, c] = 1.0 if N[a, b, table.star(c)] else 0.0
    return ordered_operator(np.diag(diag.reshape(-1)).astype(complex), list(edges), {e: n for e in edges})


def face_operator(table: FSymbolTable, graph: StringNetGraph, face: str, s) -> LocalOperator:
    bonds = [b for b, _ in graph.faces[face]]
    legs = [l for _, l in graph.faces[face]]
    return loop_operator(table, s, len(bonds), bonds, legs)


def face_projector(table: FSymbolTable, graph: StringNetGraph, face: str) -> LocalOperator:
    """``sum_s (d_s / D^2) B^s_f``."""
    d = table.quantum_dims()
    D2 = float(np.sum(d ** 2))
    out = None
    for s in range(table.n):
        B = face_operator(table, graph, face, s) * (d[s] / D2)
        out = B if out is None else out + B
    return out


def verify_central(B: LocalOperator, terms: Sequence[LocalOperator], region: Sequence | None = None,
                   restrict: LocalOperator | None = None, cap: int = ALGEBRA_DIM_CAP) -> dict:
    """Commutators of ``B`` with every term, and membership of ``B`` in the
    center of the terms' interaction algebra on ``region`` (default: supp B).

    ``restrict`` (a projector) limits the commutator check to its range.
    """
    worst = 0.0
    per_term = []
    for t in terms:
        sup = canonical_sites(B.support + t.support + (restrict.support if restrict is not None else ()))
        dims = {**B.site_dims, **t.site_dims, **(restrict.site_dims if restrict is not None else {})}
        sub = {x: dims[x] for x in sup}
        c = commutator(B.expand(sup, sub), t.expand(sup, sub))
        if restrict is not None:
            P = restrict.expand(sup, sub)
            c = P @ c @ P
        val = float(np.linalg.norm(c.matrix, 2))
        per_term.append(val)
        worst = max(worst, val)
    rep = {"max_commutator": worst, "commutators": per_term}
    region = canonical_sites(B.support if region is None else region)
    dims = {**B.site_dims}
    for t in terms:
        dims.update(t.site_dims)
    rdims = {x: dims[x] for x in region}
    d = int(np.prod(list(rdims.values())))
    if d <= cap:
        rep.update(_center_membership(B.expand(region, rdims), terms, region, rdims))
    else:
        rep["center_residual"] = None
        rep["center_note"] = f"region dimension {d} above cap {cap}"
    return rep


def _center_membership(b: LocalOperator, terms: Sequence[LocalOperator], region: tuple, rdims: dict) -> dict:
    """``b`` is central in the interaction algebra iff it commutes with the
    generators (region-side Schmidt factors) and lies in their double
    commutant, i.e. commutes with every element of the commutant."""
    gens = []
    for t in terms:
        if not set(t.support) & set(region):
            continue
        left, _ = operator_schmidt(t, region)
        gens += [g.expand(region, rdims).matrix for g in left]
    dd = b.dim
    if not gens:
        return {"center_residual": 0.0, "commutant_dim": dd * dd}
    gens = np.array(gens)
    alg = OperatorAlgebra(region, tuple(rdims[x] for x in region), gens, False, generators=gens)
    comm = commutant(alg)
    scale = max(1.0, b.norm())
    res = 0.0
    for g in gens:
        res = max(res, float(np.linalg.norm(b.matrix @ g - g @ b.matrix)) / (scale * max(1.0, np.linalg.norm(g))))
    for c in comm.basis:
        res = max(res, float(np.linalg.norm(b.matrix @ c - c @ b.matrix)) / scale)
    return {"center_residual": res, "commutant_dim": comm.dim}


def toric_terms_on_graph(graph: StringNetGraph) -> list:
    """Toric-code terms on the graph's edges: vertex ``ZZZ`` and face ``prod X`` projectors."""
    from .operators import PAULI
    out = []
    for v, es in graph.vertices.items():
        op = LocalOperator.from_factors({e: PAULI["Z"] for e in es}, {e: 2 for e in es})
        out.append((LocalOperator.identity(op.support, op.dims) + op) * 0.5)
    for f, pairs in graph.faces.items():
        es = [b for b, _ in pairs]
        op = LocalOperator.from_factors({e: PAULI["X"] for e in es}, {e: 2 for e in es})
        out.append((LocalOperator.identity(op.support, op.dims) + op) * 0.5)
    return out


def trim_bonds(m: MPO, tol: float = 1e-14) -> MPO:
    """Drop auxiliary values that no tensor uses on either side of a bond."""
    tensors = list(m.tensors)
    n = len(tensors)
    for k in range(n):
        left = tensors[k]
        right = tensors[(k + 1) % n]
        if not m.periodic and k == n - 1:
            break
        used = (np.abs(left).sum(axis=(0, 2, 3)) > tol) & (np.abs(right).sum(axis=(1, 2, 3)) > tol)
        if not used.any():
            used[0] = True
        tensors[k] = left[:, used]
        tensors[(k + 1) % n] = right[used]
    return MPO(tensors, list(m.factors), m.periodic)
