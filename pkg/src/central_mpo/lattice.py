"""Plaquette Hamiltonians on a square grid of sites.

Sites are ``(x, y)`` with ``x`` the column (horizontal) and ``y`` the row.
Every term is a projector ``P_Z`` on a unit plaquette ``Z`` anchored at its
lower-left site; the Hamiltonian is ``H = sum_Z (1 - P_Z)``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .operators import (
    DENSE_CAP,
    PAULI,
    LocalOperator,
    ResourceError,
    canonical_sites,
    commutator,
    fuse_sites,
    random_unitary,
)


def plaquette_sites(x: int, y: int) -> tuple:
    return ((x, y), (x, y + 1), (x + 1, y), (x + 1, y + 1))


def light(x: int, y: int) -> bool:
    return (x + y) % 2 == 0


@dataclass
class Term:
    anchor: tuple
    P: LocalOperator
    # optional stabilizer description: P = prod_k (1 + s_k g_k)/2 over qubit labels
    paulis: list | None = None

    @property
    def Q(self) -> LocalOperator:
        return LocalOperator.identity(self.P.support, self.P.dims) - self.P


@dataclass
class LatticeModel:
    Lx: int
    Ly: int
    dims: dict
    terms: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @classmethod
    def empty(cls, Lx: int, Ly: int | None = None, D: int = 2, **meta) -> "LatticeModel":
        Ly = Lx if Ly is None else Ly
        dims = {(x, y): D for x in range(Lx) for y in range(Ly)}
        return cls(Lx, Ly, dims, [], dict(meta))

    @property
    def sites(self) -> tuple:
        return canonical_sites(self.dims)

    @property
    def anchors(self) -> list:
        return [(x, y) for x in range(self.Lx - 1) for y in range(self.Ly - 1)]

    def column(self, C: int) -> tuple:
        return tuple((C, y) for y in range(self.Ly))

    def columns(self, C0: int, C1: int) -> tuple:
        return tuple(s for C in range(C0, C1 + 1) for s in self.column(C))

    def column_dims(self, C: int) -> tuple:
        return tuple(self.dims[s] for s in self.column(C))

    def total_dim(self, sites: Iterable | None = None) -> int:
        sites = self.sites if sites is None else sites
        return int(np.prod([self.dims[s] for s in sites]))

    def term_at(self, anchor) -> Term | None:
        for t in self.terms:
            if t.anchor == tuple(anchor):
                return t
        return None

    def window_terms(self, C0: int, C1: int | None = None) -> list:
        """Terms whose plaquette lies in columns ``C0..C1`` (default ``C0+1``)."""
        C1 = C0 + 1 if C1 is None else C1
        return [t for t in self.terms if C0 <= t.anchor[0] < C1]

    def anchor_for(self, support: Sequence) -> tuple:
        """First plaquette (canonical order) containing ``support``."""
        xs = [s[0] for s in support]
        ys = [s[1] for s in support]
        x = max(max(xs) - 1, 0)
        y = max(max(ys) - 1, 0)
        if x > min(xs) or y > min(ys) or x > self.Lx - 2 or y > self.Ly - 2:
            raise ValueError(f"no plaquette of the {self.Lx}x{self.Ly} lattice contains {tuple(support)}")
        return (x, y)

    def add_term(self, P: LocalOperator, paulis: list | None = None, anchor=None) -> Term:
        """Absorb a projector into its plaquette, merging with any existing term."""
        anchor = self.anchor_for(P.support) if anchor is None else tuple(anchor)
        sites = [s for s in plaquette_sites(*anchor) if s in self.dims]
        P = P.expand(sites, {s: self.dims[s] for s in sites})
        old = self.term_at(anchor)
        if old is None:
            t = Term(anchor, P, list(paulis) if paulis is not None else None)
            self.terms.append(t)
            self.terms.sort(key=lambda t: (t.anchor[0], t.anchor[1]))
            return t
        if commutator(old.P, P).norm() > 1e-9:
            raise ValueError(f"terms merged at plaquette {anchor} do not commute")
        old.P = old.P @ P
        if old.paulis is not None and paulis is not None:
            old.paulis = old.paulis + list(paulis)
        else:
            old.paulis = None
        return old

    def copy(self) -> "LatticeModel":
        return LatticeModel(self.Lx, self.Ly, dict(self.dims),
                            [Term(t.anchor, t.P, None if t.paulis is None else list(t.paulis)) for t in self.terms],
                            dict(self.meta))

    def stabilizer_generators(self):
        if not self.terms or any(t.paulis is None for t in self.terms):
            return None if self.terms else []
        return [g for t in self.terms for g in t.paulis]

    def qubits(self) -> list:
        return list(self.meta.get("qubits", self.sites))

    # serialization ----------------------------------------------------
    def to_dict(self) -> dict:
        out = {
            "L": self.Lx,
            "Ly": self.Ly,
            "dims": [self.dims[s] for s in self.sites],
            "terms": [],
            "meta": _jsonable(self.meta),
        }
        for t in self.terms:
            entry = {"plaquette": [list(s) for s in plaquette_sites(*t.anchor)], "P": t.P.to_dict()}
            if t.paulis is not None:
                entry["paulis"] = [[[[*_label(q), p] for q, p in g.items()], _sign(s)] for g, s in t.paulis]
            out["terms"].append(entry)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "LatticeModel":
        Lx = int(data["L"])
        Ly = int(data.get("Ly", Lx))
        sites = [(x, y) for x in range(Lx) for y in range(Ly)]
        dims_list = data["dims"]
        if len(dims_list) != len(sites):
            raise ValueError(f"dims has {len(dims_list)} entries, expected {len(sites)}")
        model = cls(Lx, Ly, dict(zip(sites, (int(d) for d in dims_list))), [], dict(data.get("meta", {})))
        if "qubits" in model.meta:
            model.meta["qubits"] = [tuple(q) for q in model.meta["qubits"]]
        for k, entry in enumerate(data.get("terms", [])):
            plaq = [tuple(s) for s in entry["plaquette"]]
            anchor = min(plaq)
            if set(plaq) != set(plaquette_sites(*anchor)):
                raise ValueError(f"terms[{k}]: {plaq} is not a unit plaquette")
            P = LocalOperator.from_dict(entry["P"])
            paulis = None
            if "paulis" in entry:
                paulis = [({tuple(q[:-1]): q[-1] for q in g}, s[0] + 1j * s[1] if isinstance(s, list) else s)
                          for g, s in entry["paulis"]]
                paulis = [(g, s.real if isinstance(s, complex) and s.imag == 0 else s) for g, s in paulis]
            model.terms.append(Term(anchor, P, paulis))
        model.terms.sort(key=lambda t: t.anchor)
        return model

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "LatticeModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _label(q) -> list:
    return list(q) if isinstance(q, tuple) else [q]


def _sign(s):
    s = complex(s)
    return [s.real, s.imag]


def _jsonable(meta: dict) -> dict:
    out = {}
    for k, v in meta.items():
        if isinstance(v, (list, tuple)):
            out[k] = [list(e) if isinstance(e, tuple) else e for e in v]
        else:
            out[k] = v
    return out


def pauli_projector(generators: list, dims: dict) -> LocalOperator:
    """``prod_k (1 + s_k g_k)/2`` for commuting signed Pauli strings on qubit sites."""
    P = None
    for paulis, sign in generators:
        g = LocalOperator.from_factors({s: PAULI[p] for s, p in paulis.items()}, dims)
        half = (LocalOperator.identity(g.support, g.dims) + g * sign) * 0.5
        P = half if P is None else P @ half
    return P


def validate(model: LatticeModel, tol: float = 1e-9) -> dict:
    """Projector and commutation residuals of every term (failures are entries, not errors)."""
    proj = 0.0
    herm = 0.0
    worst_proj = None
    for t in model.terms:
        r = (t.P @ t.P - t.P).norm()
        herm = max(herm, (t.P - t.P.dag()).norm())
        if r > proj:
            proj, worst_proj = r, t.anchor
    comm = 0.0
    worst_pair = None
    for a, b in itertools.combinations(model.terms, 2):
        if not set(a.P.support) & set(b.P.support):
            continue
        r = commutator(a.P, b.P).norm()
        if r > comm:
            comm, worst_pair = r, (a.anchor, b.anchor)
    passed = proj <= tol and comm <= tol and herm <= tol
    return {
        "n_terms": len(model.terms),
        "projector_residual": proj,
        "hermiticity_residual": herm,
        "commutator_residual": comm,
        "worst_term": list(worst_proj) if worst_proj else None,
        "worst_pair": [list(a) for a in worst_pair] if worst_pair else None,
        "tol": tol,
        "passed": bool(passed),
    }


def eigenprojector(h: LocalOperator, lam: float, tol: float = 1e-6) -> LocalOperator:
    w, v = np.linalg.eigh((h.matrix + h.matrix.conj().T) / 2)
    pick = np.abs(w - lam) <= max(tol, 1e-8)
    if not pick.any():
        raise ValueError(f"{lam} is not an eigenvalue (nearest {w[np.argmin(np.abs(w - lam))]:.3g})")
    vv = v[:, pick]
    return LocalOperator(h.support, h.dims, vv @ vv.conj().T)


def projectorize(terms: Sequence[LocalOperator], picks: Sequence[float], Lx: int, Ly: int | None = None,
                 dims: dict | None = None, tol: float = 1e-8) -> LatticeModel:
    """Replace each commuting ``h_Z`` by the projector onto its ``lambda_Z`` eigenspace."""
    model = LatticeModel.empty(Lx, Ly)
    if dims:
        model.dims.update(dims)
    for h in terms:
        model.dims.update(h.site_dims)
    for a, b in itertools.combinations(terms, 2):
        if set(a.support) & set(b.support) and commutator(a, b).norm() > tol:
            raise ValueError("terms do not commute")
    for h, lam in zip(terms, picks):
        model.add_term(eigenprojector(h, lam))
    return model


# toric code -------------------------------------------------------------

def _flip_sets(flips) -> tuple[set, set]:
    plaqs, edges = set(), set()
    for f in flips or ():
        f = tuple(f)
        if len(f) == 2 and all(isinstance(c, (int, np.integer)) for c in f):
            plaqs.add((int(f[0]), int(f[1])))
        elif len(f) == 2:
            edges.add(frozenset(tuple(int(c) for c in s) for s in f))
        else:
            raise ValueError(f"cannot parse flip {f}")
    return plaqs, edges


def toric_generators(Lx: int, Ly: int, edges: str = "tb", flips=()) -> dict:
    """Signed Pauli generators keyed by plaquette anchor."""
    plaq_flips, edge_flips = _flip_sets(flips)
    out: dict = {}
    for x in range(Lx - 1):
        for y in range(Ly - 1):
            lit = light(x, y)
            gens = [({s: "Z" if lit else "X" for s in plaquette_sites(x, y)}, -1 if (x, y) in plaq_flips else 1)]
            if lit:
                pairs = []
                if "tb" in edges:
                    if y == 0:
                        pairs.append(((x, 0), (x + 1, 0)))
                    if y == Ly - 2:
                        pairs.append(((x, Ly - 1), (x + 1, Ly - 1)))
                if "lr" in edges:
                    if x == 0:
                        pairs.append(((0, y), (0, y + 1)))
                    if x == Lx - 2:
                        pairs.append(((Lx - 1, y), (Lx - 1, y + 1)))
                for a, b in pairs:
                    sign = -1 if frozenset((a, b)) in edge_flips else 1
                    gens.append(({a: "X", b: "X"}, sign))
            out[(x, y)] = gens
    return out


def build_toric_code(L: int, Ly: int | None = None, edges: str = "tb", flips=(), require_even: bool = True) -> LatticeModel:
    """Toric code with checkerboard Z/X plaquettes and optional boundary XX terms.

    ``edges``: "" (none), "tb" (top/bottom) or "tblr" (all four sides, the
    pinned variant).  ``flips`` holds plaquette anchors ``(x, y)`` or site
    pairs ``((x1, y1), (x2, y2))`` whose terms change sign.
    """
    Lx = L
    Ly = L if Ly is None else Ly
    if require_even and (Lx % 2 or Ly % 2):
        raise ValueError("toric code needs even sides so that all corners are light")
    model = LatticeModel.empty(Lx, Ly, 2, name="toric", edges=edges,
                               flips=[[list(s) for s in f] if isinstance(f[0], (tuple, list)) else list(f) for f in flips])
    dims = model.dims
    for anchor, gens in toric_generators(Lx, Ly, edges, flips).items():
        model.add_term(pauli_projector(gens, dims), gens, anchor)
    return model


def column_string(model: LatticeModel, C: int, pauli: str = "X") -> LocalOperator:
    sites = model.column(C)
    return LocalOperator.from_factors({s: PAULI[pauli] for s in sites}, model.dims)


def light_product(model: LatticeModel, rows: Iterable[int] | None = None) -> LocalOperator:
    """Product of sigma^z over the given rows (all rows by default)."""
    rows = range(model.Ly) if rows is None else rows
    sites = [(x, y) for x in range(model.Lx) for y in rows]
    return LocalOperator.from_factors({s: PAULI["Z"] for s in sites}, model.dims)


# k copies and squashing -------------------------------------------------

def k_copy(model: LatticeModel, k: int) -> LatticeModel:
    """``k`` independent copies of the model, one copy per tensor factor of each site."""
    if k < 1:
        raise ValueError("k must be positive")
    D = {s: d ** k for s, d in model.dims.items()}
    if max(D.values()) ** 4 > DENSE_CAP:
        raise ResourceError(f"plaquette dimension {max(D.values()) ** 4} exceeds cap {DENSE_CAP}")
    if k == 1:
        return model.copy()
    out = LatticeModel(model.Lx, model.Ly, D, [], {**model.meta, "copies": k})
    fusion = {s: [(s[0], s[1], a) for a in range(k)] for s in model.sites}
    vdims = {(s[0], s[1], a): model.dims[s] for s in model.sites for a in range(k)}
    qubit_model = all(t.paulis is not None for t in model.terms)
    if qubit_model:
        out.meta["qubits"] = [(s[0], s[1], a) for s in model.sites for a in range(k)]
    for t in model.terms:
        for a in range(k):
            relabel = LocalOperator(tuple((s[0], s[1], a) for s in t.P.support), t.P.dims, t.P.matrix)
            paulis = None
            if qubit_model:
                paulis = [({(q[0], q[1], a): p for q, p in g.items()}, s) for g, s in t.paulis]
            out.add_term(fuse_sites(relabel, fusion, vdims), paulis, t.anchor)
    return out


def cylinder_fold(Lx: int, Ly: int) -> dict:
    """Planar site -> the two cylinder sites it holds."""
    if Ly % 2:
        raise ValueError("cylinder circumference must be even")
    return {(x, y): [(x, y), (x, Ly - 1 - y)] for x in range(Lx) for y in range(Ly // 2)}


def squash_cylinder(Lx: int, Ly: int, cyl_terms: Sequence, cyl_dims: dict | None = None, name: str = "cylinder") -> LatticeModel:
    """Fold a cylinder (periodic in y) onto an ``Lx x Ly/2`` planar lattice.

    ``cyl_terms`` are projectors on cylinder sites, optionally paired with a
    Pauli description: either ``LocalOperator`` or ``(LocalOperator, paulis)``.
    """
    fusion = cylinder_fold(Lx, Ly)
    cyl_dims = cyl_dims or {(x, y): 2 for x in range(Lx) for y in range(Ly)}
    dims = {s: cyl_dims[a] * cyl_dims[b] for s, (a, b) in fusion.items()}
    model = LatticeModel(Lx, Ly // 2, dims, [], {"name": name, "folded_from": [Lx, Ly]})
    owner = {old: new for new, olds in fusion.items() for old in olds}
    all_pauli = True
    for entry in cyl_terms:
        P, paulis = (entry if isinstance(entry, tuple) else (entry, None))
        all_pauli &= paulis is not None
        planar = canonical_sites(owner[s] for s in P.support)
        try:
            anchor = model.anchor_for(planar)
        except ValueError as exc:
            raise RuntimeError(f"cylinder term on {P.support} does not fold into a plaquette") from exc
        model.add_term(fuse_sites(P, fusion, cyl_dims), paulis, anchor)
    if all_pauli:
        model.meta["qubits"] = sorted(cyl_dims)
    return model


def toric_cylinder_generators(Lx: int, Ly: int, edges: str = "lr", flips=(), caps: bool = False) -> list:
    """Signed Pauli generators of the toric code on a cylinder of circumference ``Ly``.

    ``edges="lr"`` adds XX terms on vertical boundary pairs inside light
    plaquettes.  ``caps`` closes both ends with a Z face, giving a sphere.
    """
    if Ly % 2:
        raise ValueError("cylinder circumference must be even")
    named = {f for f in (flips or ()) if isinstance(f, str)}
    plaq_flips, edge_flips = _flip_sets([f for f in (flips or ()) if not isinstance(f, str)])
    gens = []
    for x in range(Lx - 1):
        for y in range(Ly):
            sites = [(x, y), (x + 1, y), (x, (y + 1) % Ly), (x + 1, (y + 1) % Ly)]
            lit = light(x, y)
            gens.append(({s: "Z" if lit else "X" for s in sites}, -1 if (x, y) in plaq_flips else 1))
            if lit and "lr" in edges:
                for xe in {0, Lx - 1} & {x, x + 1}:
                    a, b = (xe, y), (xe, (y + 1) % Ly)
                    gens.append(({a: "X", b: "X"}, -1 if frozenset((a, b)) in edge_flips else 1))
    if caps:
        for xe, key in ((0, "north"), (Lx - 1, "south")):
            sign = -1 if key in named else 1
            gens.append(({(xe, y): "Z" for y in range(Ly)}, sign))
    return gens


def pauli_terms(gens: list, dims: dict) -> list:
    return [(pauli_projector([g], dims), [g]) for g in gens]


def squash_sphere(Lx: int, Ly: int, flips=()) -> LatticeModel:
    """Toric code on a capped cylinder (a sphere) folded flat.

    The caps are single Z faces on the first and last columns, with XX
    terms on the boundary bonds of light plaquettes; they fold into a
    plaquette only when ``Ly <= 4``.
    """
    if Ly > 4:
        raise ValueError("sphere caps fold into a plaquette only for circumference <= 4")
    gens = toric_cylinder_generators(Lx, Ly, edges="lr", flips=flips, caps=True)
    cdims = {(x, y): 2 for x in range(Lx) for y in range(Ly)}
    return squash_cylinder(Lx, Ly, pauli_terms(gens, cdims), cdims, name="sphere")


# dense views -------------------------------------------------------------

def window_operator(model: LatticeModel, C0: int, C1: int | None = None) -> LocalOperator:
    """Dense ``P_{C0,C1}``: product of the terms whose plaquettes lie in columns C0..C1."""
    C1 = C0 + 1 if C1 is None else C1
    sites = model.columns(C0, C1)
    dims = {s: model.dims[s] for s in sites}
    out = LocalOperator.identity(sites, [dims[s] for s in sites])
    for t in model.window_terms(C0, C1):
        out = out @ t.P.expand(sites, dims)
    return out


@dataclass(frozen=True)
class ColumnWindowOperator:
    columns: tuple
    operator: object


def column_window(model: LatticeModel, C0: int, C1: int | None = None, mpo: bool = False) -> ColumnWindowOperator:
    C1 = C0 + 1 if C1 is None else C1
    if mpo:
        from .mpo import window_mpo
        return ColumnWindowOperator((C0, C1), window_mpo(model, C0, C1))
    return ColumnWindowOperator((C0, C1), window_operator(model, C0, C1))


def dense_hamiltonian(model: LatticeModel) -> np.ndarray:
    d = model.total_dim()
    if d > DENSE_CAP:
        raise ResourceError(f"dense Hamiltonian of dimension {d} exceeds cap {DENSE_CAP}")
    H = np.zeros((d, d), dtype=complex)
    for t in model.terms:
        H += t.Q.expand(model.sites, model.dims).matrix
    return H


def ground_projector(model: LatticeModel, tol: float = 1e-8) -> np.ndarray:
    """Dense ``prod_Z P_Z`` on all sites."""
    d = model.total_dim()
    if d > DENSE_CAP:
        raise ResourceError(f"dense projector of dimension {d} exceeds cap {DENSE_CAP}")
    out = np.eye(d, dtype=complex)
    for t in model.terms:
        out = out @ t.P.expand(model.sites, model.dims).matrix
    return out


@dataclass
class EffectiveHamiltonian:
    table: dict
    operator: LocalOperator | None
    labels: list

    def minimum(self) -> float:
        return min(self.table.values()) if self.table else float("inf")


def effective_classical_hamiltonian(model: LatticeModel, column_decomps: Sequence, eig_cap: int = 4096) -> EffectiveHamiltonian:
    """Minimum energy of ``H`` inside every joint range ``prod_C P^{alpha_C}_C``."""
    H = dense_hamiltonian(model)
    d = H.shape[0]
    if d > eig_cap:
        raise ResourceError(f"eigen-solve of dimension {d} exceeds cap {eig_cap}")
    cols = [dec.matrices() for dec in column_decomps]
    if len(cols) != model.Lx:
        raise ValueError("need one decomposition per column")
    table = {}
    op = np.zeros((d, d), dtype=complex)
    for alpha in itertools.product(*[range(len(c)) for c in cols]):
        proj = np.eye(1)
        for C, a in enumerate(alpha):
            proj = np.kron(proj, cols[C][a])
        w, v = np.linalg.eigh(proj)
        V = v[:, w > 0.5]
        if V.shape[1] == 0:
            table[alpha] = float("inf")
            continue
        e = float(np.linalg.eigvalsh(V.conj().T @ H @ V)[0])
        e = 0.0 if abs(e) < 1e-9 else e
        table[alpha] = e
        op += e * proj
    return EffectiveHamiltonian(table, LocalOperator(model.sites, tuple(model.dims[s] for s in model.sites), op),
                                [list(range(len(c))) for c in cols])


# random instances -------------------------------------------------------

def _commute_dicts(a: dict, b: dict) -> bool:
    anti = sum(1 for s in set(a) & set(b) if a[s] != b[s])
    return anti % 2 == 0


def random_pauli_model(Lx: int, Ly: int, seed: int, density: float = 0.8, per_plaquette: int = 2,
                       conjugate: bool = True) -> LatticeModel:
    """Random commuting Pauli stabilizer terms, optionally rotated by local unitaries."""
    rng = np.random.default_rng(seed)
    model = LatticeModel.empty(Lx, Ly, 2, name="random_pauli", seed=seed)
    accepted: list = []
    for anchor in model.anchors:
        if rng.random() > density:
            continue
        gens = []
        for _ in range(int(rng.integers(1, per_plaquette + 1))):
            for _attempt in range(64):
                letters = rng.integers(0, 4, size=4)
                g = {s: "IXYZ"[c] for s, c in zip(plaquette_sites(*anchor), letters) if c}
                if len(g) < 2:
                    continue
                if all(_commute_dicts(g, h) for h, _ in accepted + gens):
                    if any(g == h for h, _ in accepted + gens):
                        continue
                    gens.append((g, int(rng.choice([-1, 1]))))
                    break
        if gens:
            accepted.extend(gens)
            model.add_term(pauli_projector(gens, model.dims), gens, anchor)
    if conjugate:
        U = {s: random_unitary(2, rng) for s in model.sites}
        for t in model.terms:
            u = LocalOperator.from_factors({s: U[s] for s in t.P.support}, model.dims)
            t.P = u @ t.P @ u.dag()
        model.meta["conjugated"] = True
    return model


def random_classical_model(Lx: int, Ly: int, seed: int, D: int = 2, p_allow: float = 0.75,
                           rotate: bool = True) -> LatticeModel:
    """Diagonal random projectors, all written in one rotated product basis."""
    rng = np.random.default_rng(seed)
    model = LatticeModel.empty(Lx, Ly, D, name="random_classical", seed=seed)
    V = {s: random_unitary(D, rng) if rotate else np.eye(D) for s in model.sites}
    for anchor in model.anchors:
        mask = rng.random(D ** 4) < p_allow
        if not mask.any():
            mask[rng.integers(D ** 4)] = True
        sites = plaquette_sites(*anchor)
        P = LocalOperator(sites, (D,) * 4, np.diag(mask.astype(complex)))
        v = LocalOperator.from_factors({s: V[s] for s in sites}, model.dims)
        model.add_term(v @ P @ v.dag(), None, anchor)
    return model


def random_commuting_model(Lx: int, Ly: int, seed: int) -> LatticeModel:
    """Alternate between rotated stabilizer and rotated classical instances."""
    if seed % 2:
        return random_classical_model(Lx, Ly, seed)
    return random_pauli_model(Lx, Ly, seed)


def regroup_columns(model: LatticeModel, groups: Sequence[Sequence[int]]) -> LatticeModel:
    """Merge consecutive columns into supersite columns (row by row)."""
    flat = [c for g in groups for c in g]
    if flat != list(range(model.Lx)):
        raise ValueError("groups must partition the columns in order")
    fusion = {(g, y): [(c, y) for c in cols] for g, cols in enumerate(groups) for y in range(model.Ly)}
    dims = {s: int(np.prod([model.dims[o] for o in olds])) for s, olds in fusion.items()}
    out = LatticeModel(len(groups), model.Ly, dims, [], {**model.meta, "groups": [list(g) for g in groups]})
    owner = {old: new for new, olds in fusion.items() for old in olds}
    for t in model.terms:
        planar = canonical_sites(owner[s] for s in t.P.support)
        if out.Lx == 1:
            raise ValueError("regrouping into a single column leaves no plaquettes")
        out.add_term(fuse_sites(t.P, fusion, model.dims), None, out.anchor_for(planar))
    return out


# column algebras ----------------------------------------------------------

def column_terms(model: LatticeModel, C: int, side: str = "left") -> list:
    """Terms coupling column ``C`` to its left/right neighbour (or both)."""
    terms = []
    if side in ("left", "both") and C > 0:
        terms += model.window_terms(C - 1)
    if side in ("right", "both") and C < model.Lx - 1:
        terms += model.window_terms(C)
    return terms


def column_interaction_algebra(model: LatticeModel, C: int, side: str = "left"):
    """Interaction algebra on column ``C`` of the terms in the chosen window(s)."""
    from .algebra import interaction_algebra, trivial_algebra
    sites = model.column(C)
    terms = [t.P for t in column_terms(model, C, side)]
    if not terms:
        return trivial_algebra(sites, model.column_dims(C), flagged=True)
    return interaction_algebra(terms, sites, {s: model.dims[s] for s in sites})


def column_decomposition(model: LatticeModel, C: int, side: str = "left", seed: int = 0):
    from .algebra import minimal_central_projectors
    return minimal_central_projectors(column_interaction_algebra(model, C, side), seed)
