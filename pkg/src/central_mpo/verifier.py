"""Column propagation, masks and the witness verifier.

Columns are numbered ``0..n-1``.  A witness gives a projector ``P_C`` per
column as an MPO over that column's sites.  The verifier evaluates

    tr(P_0 W_0 P_1 W_1 ... W_{n-2} P_{n-1})

one column at a time, where ``W_C`` is the product of the terms in columns
``C, C+1``, and accepts only if every step stays proportional with a
positive constant and the final trace is positive.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .lattice import (
    LatticeModel,
    column_decomposition,
    column_string,
    regroup_columns,
    window_operator,
)
from .mpo import (
    MPO,
    column_identity,
    column_mpo,
    compress,
    embed_in_window,
    multiply,
    proportionality,
    propagate,
    window_mpo,
)
from .operators import DENSE_CAP, LocalOperator, ResourceError, partial_trace
from .stabilizer import stabilizer_zero_count

POSITIVITY = 1e-10
RESIDUAL_TOL = 1e-8


@dataclass
class ZeroCount:
    count: int
    trace: float
    method: str


def _dense_apply_trace(model: LatticeModel, ops: Sequence[LocalOperator], batch: int = 512) -> complex:
    """``tr(ops[0] ops[1] ...)`` by applying the local factors to batches of basis vectors."""
    sites = model.sites
    dims = [model.dims[s] for s in sites]
    d = int(np.prod(dims))
    pos = {s: k for k, s in enumerate(sites)}
    total = 0j
    for start in range(0, d, batch):
        cols = np.arange(start, min(d, start + batch))
        psi = np.zeros((d, len(cols)), dtype=complex)
        psi[cols, np.arange(len(cols))] = 1.0
        psi = psi.reshape(dims + [len(cols)])
        for op in reversed(ops):
            axes = [pos[s] for s in op.support]
            k = len(axes)
            t = op.matrix.reshape(op.dims * 2)
            psi = np.tensordot(t, psi, axes=(list(range(k, 2 * k)), axes))
            psi = np.moveaxis(psi, list(range(k)), axes)
        flat = psi.reshape(d, len(cols))
        total += complex(np.sum(flat[cols, np.arange(len(cols))]))
    return total


def _dense_apply_count(model: LatticeModel, batch: int = 512) -> float:
    return _dense_apply_trace(model, [t.P for t in model.terms], batch).real


def _transfer_count(model: LatticeModel) -> float:
    rho = LocalOperator.identity(model.column(0), model.column_dims(0))
    if model.Lx == 1:
        return rho.trace().real
    for C in range(model.Lx - 1):
        W = window_operator(model, C)
        rho = partial_trace(rho.expand(W.support, W.site_dims) @ W, model.column(C + 1))
    return rho.trace().real


def brute_force_zero_count(model: LatticeModel, method: str = "auto") -> ZeroCount:
    """``tr(prod_Z P_Z)``: the number of zero-energy states.

    Methods: "stabilizer" (GF(2) rank, Pauli models of any size), "dense"
    (projectors applied to every basis vector, dimension <= 2^12) and
    "transfer" (dense column-by-column partial traces).
    """
    if method == "auto":
        if model.stabilizer_generators() is not None:
            method = "stabilizer"
        elif model.total_dim() <= 4096:
            method = "dense"
        else:
            method = "transfer"
    if method == "stabilizer":
        gens = model.stabilizer_generators()
        if gens is None:
            raise ValueError("model has no stabilizer description")
        n = stabilizer_zero_count(gens, model.qubits())
        return ZeroCount(n, float(n), method)
    if method == "dense":
        if model.total_dim() > DENSE_CAP:
            raise ResourceError(f"dense count of dimension {model.total_dim()} exceeds cap {DENSE_CAP}")
        raw = _dense_apply_count(model)
    elif method == "transfer":
        raw = _transfer_count(model)
    else:
        raise ValueError(f"unknown method {method}")
    n = int(round(raw))
    if abs(raw - n) > 1e-6:
        raise ValueError(f"trace {raw} is not an integer: terms do not commute or are not projectors")
    return ZeroCount(n, raw, method)


def eigen_zero_count(model: LatticeModel, cap: int = 4096, tol: float = 1e-8) -> int:
    """Null-space dimension of the dense Hamiltonian (exact diagonalization)."""
    from .lattice import dense_hamiltonian
    d = model.total_dim()
    if d > cap:
        raise ResourceError(f"eigen-solve of dimension {d} exceeds cap {cap}")
    w = np.linalg.eigvalsh(dense_hamiltonian(model))
    return int(np.sum(np.abs(w) < tol))


# phi reduction and masks -------------------------------------------------

def decomposition_mpos(decomp, model: LatticeModel, C: int) -> list:
    return [column_mpo(p, model, C) for p in decomp.projectors]


def phi_reduce(rho: MPO, decomp, model: LatticeModel, C: int) -> MPO:
    """``phi_C = sum_alpha P^alpha tr(P^alpha rho) / tr(P^alpha)``."""
    out = None
    for P in decomposition_mpos(decomp, model, C):
        tp = P.trace()
        if abs(tp) < 1e-12:
            raise RuntimeError("minimal central projector with zero trace")
        term = P * ((P @ rho).trace() / tp)
        out = term if out is None else out + term
    return compress(out)


def column_operator_basis(dims: Sequence[int]):
    """Matrix units on a column, as product MPOs."""
    for idx in itertools.product(*[range(d * d) for d in dims]):
        mats = []
        for d, k in zip(dims, idx):
            m = np.zeros((d, d), dtype=complex)
            m[divmod(k, d)] = 1.0
            mats.append(m)
        yield MPO.product(mats)


def random_column_operator(dims: Sequence[int], rng, bond: int = 2) -> MPO:
    n = len(dims)
    tensors = []
    for k, d in enumerate(dims):
        l = 1 if k == 0 else bond
        r = 1 if k == n - 1 else bond
        tensors.append((rng.standard_normal((l, r, d, d)) + 1j * rng.standard_normal((l, r, d, d))) / np.sqrt(2))
    return MPO(tensors)


@dataclass
class MaskReport:
    column: int
    is_mask: bool
    max_deviation: float
    xs: list
    samples: int
    exhaustive: bool
    seed: int

    def to_dict(self) -> dict:
        return {"column": self.column, "is_mask": self.is_mask, "max_deviation": self.max_deviation,
                "x": [[complex(x).real, complex(x).imag] for x in self.xs], "samples": self.samples,
                "exhaustive": self.exhaustive, "seed": self.seed}


def is_mask(o_c, model: LatticeModel, C: int, samples: int = 8, seed: int = 0, exhaustive: bool | None = None,
            tol: float = 1e-9) -> MaskReport:
    """Does ``O_C`` mask every ``O_{C-1}``?  Checks the defining trace identity."""
    if isinstance(o_c, LocalOperator):
        o_c = column_mpo(o_c, model, C)
    if C == 0 or C >= model.Lx - 1:
        # no left column or no right window: the identity holds with a scalar x
        return MaskReport(C, True, 0.0, [], 0, True, seed)
    W_left = window_mpo(model, C - 1)
    W_right = window_mpo(model, C)
    rhs = propagate(o_c, W_right)
    dims = list(model.column_dims(C - 1))
    if exhaustive is None:
        exhaustive = int(np.prod(dims)) ** 2 <= 4096
    rng = np.random.default_rng(seed)
    probes = list(column_operator_basis(dims)) if exhaustive else []
    probes += [random_column_operator(dims, rng) for _ in range(samples)]
    worst = 0.0
    xs = []
    for o_prev in probes:
        sigma = propagate(o_prev, W_left)
        lhs = propagate(multiply(sigma, o_c), W_right)
        floor = 1e-12 * max(1.0, sigma.norm() * o_c.norm() * W_right.norm())
        pr = proportionality(lhs, rhs, tol, floor)
        xs.append(pr.x)
        worst = max(worst, pr.residual)
    return MaskReport(C, worst <= tol, worst, xs, len(probes), exhaustive, seed)


# witnesses ----------------------------------------------------------------

@dataclass
class Witness:
    entries: dict  # column -> MPO
    coverage: str | list = "all"

    def to_dict(self) -> dict:
        return {"entries": [{"column": int(C), "mpo": m.to_dict()} for C, m in sorted(self.entries.items())],
                "coverage": self.coverage}

    @classmethod
    def from_dict(cls, data: dict) -> "Witness":
        entries = {int(e["column"]): MPO.from_dict(e["mpo"]) for e in data["entries"]}
        return cls(entries, data.get("coverage", "all"))

    @property
    def bond_dims(self) -> dict:
        return {C: m.bond_dims for C, m in self.entries.items()}


@dataclass
class VerificationReport:
    verdict: str  # accept | reject | unable
    constants: list = field(default_factory=list)
    commutation_residuals: list = field(default_factory=list)
    projector_residuals: list = field(default_factory=list)
    final_trace: float | None = None
    total: float | None = None
    reason: str | None = None

    @property
    def accepted(self) -> bool:
        return self.verdict == "accept"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "c": [[complex(c).real, complex(c).imag] for c in self.constants],
            "residuals": self.commutation_residuals,
            "projector_residuals": self.projector_residuals,
            "trace": self.final_trace,
            "total": self.total,
            "reason": self.reason,
        }


def toric_witness(model: LatticeModel, signs: Sequence[int] | None = None) -> Witness:
    """``P_C = (1 + s_C O^x_C)/2`` for every column."""
    entries = {}
    for C in range(model.Lx):
        s = 1 if signs is None else signs[C]
        ox = column_mpo(column_string(model, C, "X"), model, C)
        entries[C] = compress((column_identity(model, C) + ox * s) * 0.5)
    return Witness(entries)


def identity_witness(model: LatticeModel) -> Witness:
    return Witness({C: column_identity(model, C) for C in range(model.Lx)})


def _sparse_groups(L: int, columns: Sequence[int]) -> list:
    """Column groups ending at each witness column.

    Columns after the last witness column form a trailing group carrying the
    identity; a lone witness column at the right edge gets an identity group
    in front of it, so that at least two supersite columns remain.
    """
    cols = sorted(columns)
    groups = []
    start = 0
    for c in cols:
        groups.append(list(range(start, c + 1)))
        start = c + 1
    if start < L:
        groups.append(list(range(start, L)))
    if len(groups) == 1 and L > 1:
        groups = [list(range(L - 1)), [L - 1]]
    return groups


def _embed_column(m: MPO, factors: list, position: int) -> MPO:
    template = MPO.identity([int(np.prod(f)) for f in factors], factors)
    return embed_in_window(m, template, position)


def regroup_witness(model: LatticeModel, witness: Witness):
    """Collapse sparse coverage into supersite columns (one witness column per group)."""
    cols = sorted(witness.entries)
    groups = _sparse_groups(model.Lx, cols)
    grouped = regroup_columns(model, groups)
    entries = {}
    for g, group in enumerate(groups):
        factors = [tuple(model.dims[(c, y)] for c in group) for y in range(model.Ly)]
        inside = [C for C in cols if C in group]
        if inside:
            entries[g] = _embed_column(witness.entries[inside[0]], factors, group.index(inside[0]))
        else:
            entries[g] = MPO.identity([int(np.prod(f)) for f in factors], factors)
    return grouped, Witness(entries)


def verify_witness(model: LatticeModel, w: Witness, tol: float = RESIDUAL_TOL) -> VerificationReport:
    """Check the commutation conditions and evaluate the propagated trace."""
    try:
        if w.coverage != "all" or sorted(w.entries) != list(range(model.Lx)):
            if not w.entries:
                return VerificationReport("reject", reason="empty witness")
            model, w = regroup_witness(model, w)
        return _verify(model, w, tol)
    except ResourceError as exc:
        return VerificationReport("unable", reason=f"unable to verify: {exc}")


def _verify(model: LatticeModel, w: Witness, tol: float) -> VerificationReport:
    n = model.Lx
    rep = VerificationReport("reject")
    P = []
    for C in range(n):
        m = w.entries[C]
        if m.phys_dims != list(model.column_dims(C)):
            rep.reason = f"column {C}: physical dimensions {m.phys_dims} do not match the model"
            return rep
        res = (multiply(m, m) - m).norm() / max(1.0, m.norm())
        rep.projector_residuals.append(res)
        if res > tol:
            rep.reason = f"column {C}: not a projector (residual {res:.2e})"
            return rep
        P.append(m)
    windows = [window_mpo(model, C) for C in range(n - 1)]
    for C in range(1, n):
        E = embed_in_window(P[C], windows[C - 1], 1)
        a = multiply(E, windows[C - 1])
        b = multiply(windows[C - 1], E)
        scale = max(a.norm(), b.norm())
        floor = 1e-12 * E.norm() * windows[C - 1].norm()
        res = (a - b).norm() / scale if scale > floor else 0.0
        rep.commutation_residuals.append(res)
        if res > tol:
            rep.reason = f"column {C}: projector does not commute with the window to its left (residual {res:.2e})"
            return rep
    if n == 1:
        rep.final_trace = P[0].trace().real
        rep.total = rep.final_trace
    else:
        sigma = propagate(P[0], windows[0])
        for C in range(1, n - 1):
            lhs = propagate(multiply(sigma, P[C]), windows[C])
            rhs = propagate(P[C], windows[C])
            floor = 1e-12 * sigma.norm() * P[C].norm() * windows[C].norm()
            pr = proportionality(lhs, rhs, tol, floor)
            if not pr.proportional:
                rep.reason = f"column {C}: propagated operator is not proportional (residual {pr.residual:.2e})"
                return rep
            if pr.degenerate or rhs.norm() == 0:
                rep.constants.append(0j)
                rep.reason = "zero trace"
                rep.final_trace = 0.0
                return rep
            c = complex(pr.x)
            rep.constants.append(c)
            if c.real <= POSITIVITY or abs(c.imag) > tol * max(1.0, abs(c)):
                rep.reason = f"nonpositive constant at column {C}"
                return rep
            sigma = rhs
        rep.final_trace = multiply(sigma, P[n - 1]).trace().real
        rep.total = float(np.prod([c.real for c in rep.constants]) * rep.final_trace)
    if rep.final_trace <= POSITIVITY:
        rep.reason = "zero trace"
        return rep
    rep.verdict = "accept"
    return rep


def dense_witness_trace(model: LatticeModel, w: Witness) -> float:
    """Reference value of ``tr(prod_C P_C prod_Z P_Z)`` with dense vectors."""
    d = model.total_dim()
    if d > DENSE_CAP:
        raise ResourceError(f"dense dimension {d} exceeds cap {DENSE_CAP}")
    cols = [w.entries[C].to_local(model.column(C)) for C in range(model.Lx)]
    return _dense_apply_trace(model, cols + [t.P for t in model.terms]).real


def propagation_equivalence(model: LatticeModel, seed: int = 0) -> list:
    """Max deviation between the two forms of each propagation step, per column."""
    devs = []
    rho = column_identity(model, 0)
    for C in range(model.Lx - 1):
        W = window_mpo(model, C)
        direct = propagate(rho, W)
        if C == 0:
            phi = rho
        else:
            phi = phi_reduce(rho, column_decomposition(model, C, "left", seed), model, C)
        via_phi = propagate(phi, W)
        scale = max(direct.norm(), 1e-300)
        devs.append((direct - via_phi).norm() / scale)
        rho = direct
    return devs
