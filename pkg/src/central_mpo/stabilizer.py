"""Pauli-string arithmetic over GF(2) for zero-energy counts of stabilizer models."""

from __future__ import annotations

import numpy as np

from .operators import canonical_sites


class PauliString:
    """``phase * prod_k X^{x_k} Z^{z_k}`` over a fixed site list; phase is a power of i."""

    __slots__ = ("x", "z", "phase")

    def __init__(self, x: np.ndarray, z: np.ndarray, phase: int = 0):
        self.x = x.astype(np.uint8) % 2
        self.z = z.astype(np.uint8) % 2
        self.phase = phase % 4

    @classmethod
    def from_dict(cls, paulis: dict, sites: list, sign: complex = 1) -> "PauliString":
        index = {s: k for k, s in enumerate(sites)}
        n = len(sites)
        x = np.zeros(n, dtype=np.uint8)
        z = np.zeros(n, dtype=np.uint8)
        phase = {1: 0, 1j: 1, -1: 2, -1j: 3}[complex(sign)]
        for s, p in paulis.items():
            k = index[s]
            if p in "XY":
                x[k] = 1
            if p in "ZY":
                z[k] = 1
            if p == "Y":
                phase += 1  # Y = i X Z
        return cls(x, z, phase)

    def __mul__(self, other: "PauliString") -> "PauliString":
        # X^a Z^b X^c Z^d = (-1)^{b.c} X^{a+c} Z^{b+d}
        sign = 2 * int(np.dot(self.z.astype(int), other.x.astype(int)) % 2)
        return PauliString(self.x ^ other.x, self.z ^ other.z, self.phase + other.phase + sign)

    def commutes(self, other: "PauliString") -> bool:
        s = np.dot(self.x.astype(int), other.z.astype(int)) + np.dot(self.z.astype(int), other.x.astype(int))
        return s % 2 == 0

    def is_identity(self) -> bool:
        return not self.x.any() and not self.z.any()

    def vector(self) -> np.ndarray:
        return np.concatenate([self.x, self.z])


def stabilizer_zero_count(generators: list, sites) -> int:
    """Dimension of the joint +1 eigenspace of commuting signed Pauli strings.

    ``generators`` is a list of ``(paulis_dict, sign)``.  Returns 0 when the
    signs are inconsistent (``-1`` lies in the generated group).
    """
    sites = list(canonical_sites(sites))
    n = len(sites)
    strings = [PauliString.from_dict(p, sites, s) for p, s in generators]
    for a in range(len(strings)):
        for b in range(a + 1, len(strings)):
            if not strings[a].commutes(strings[b]):
                raise ValueError("stabilizer generators do not commute")
    for g in strings:
        if (g.phase - int(np.dot(g.x.astype(int), g.z.astype(int)))) % 2:
            raise ValueError("generator is not Hermitian")
    pivots: list[tuple[int, PauliString]] = []
    for g in strings:
        h = g
        for col, row in pivots:
            if h.vector()[col]:
                h = h * row
        if h.is_identity():
            if h.phase == 2:
                return 0
            continue
        col = int(np.flatnonzero(h.vector())[0])
        # keep the reduced rows echelon-consistent
        new_pivots = []
        for c, row in pivots:
            if row.vector()[col]:
                row = row * h
            new_pivots.append((c, row))
        pivots = new_pivots + [(col, h)]
    return 2 ** (n - len(pivots))
