"""Fermionic Pauli group, its BD/ABD partition and the restricted Clifford set."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from .fock import check_modes, structure

log = logging.getLogger(__name__)

# single-mode fermionic Paulis in the {|E>, |O>} = {|0>, f^dag|0>} basis
SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
PHASES = (1, 1j, -1, -1j)


def letters_matrix(letters: str) -> np.ndarray:
    """N-fold wedge product of single-mode Paulis; letters[0] acts on mode 1."""
    out = np.ones((1, 1), dtype=complex)
    for ch in letters:
        out = np.kron(SINGLE[ch], out)
    return out


@dataclass(frozen=True)
class PauliElement:
    phase: complex
    letters: str

    @cached_property
    def matrix(self) -> np.ndarray:
        return self.phase * letters_matrix(self.letters)

    @property
    def is_hermitian(self) -> bool:
        m = self.matrix
        return bool(np.allclose(m, m.conj().T, atol=0))

    @property
    def is_bd(self) -> bool:
        return sum(ch in "XY" for ch in self.letters) % 2 == 0


@dataclass(frozen=True)
class PauliPartition:
    xi_bd: tuple
    xi_abd: tuple


def pauli_group(n: int) -> list[PauliElement]:
    n = check_modes(n)
    return [
        PauliElement(ph, "".join(ls))
        for ls in itertools.product("IXYZ", repeat=n)
        for ph in PHASES
    ]


def hermitian_paulis(n: int) -> list[PauliElement]:
    return [p for p in pauli_group(n) if p.is_hermitian]


def pauli_letters(n: int) -> list[str]:
    """One representative (phase +1) per Hermitian letter string."""
    return ["".join(ls) for ls in itertools.product("IXYZ", repeat=check_modes(n))]


def partition_bd_abd(paulis) -> PauliPartition:
    bd, abd = [], []
    for p in paulis:
        s = structure(p.matrix)
        if s == "BD":
            bd.append(p)
        elif s == "ABD":
            abd.append(p)
        else:  # cannot happen for a Pauli string
            raise ValueError(f"Pauli {p} has mixed parity structure")
    return PauliPartition(tuple(bd), tuple(abd))


@lru_cache(maxsize=None)
def _letter_table(n: int) -> tuple[list[str], np.ndarray]:
    letters = pauli_letters(n)
    mats = np.stack([letters_matrix(s) for s in letters])
    return letters, mats


def decompose_pauli(m: np.ndarray, tol: float = 1e-9) -> tuple[complex, str] | None:
    """Return (phase, letters) if m equals phase * Pauli string, else None."""
    n = int(round(np.log2(m.shape[0])))
    letters, mats = _letter_table(n)
    coeff = np.einsum("kij,ji->k", mats, m) / m.shape[0]
    k = int(np.argmax(np.abs(coeff)))
    if abs(abs(coeff[k]) - 1) > tol:
        return None
    return complex(coeff[k]), letters[k]


def _pauli_image(u: np.ndarray, letters: str) -> tuple[complex, str] | None:
    return decompose_pauli(u @ letters_matrix(letters) @ u.conj().T)


def is_clifford(u: np.ndarray) -> bool:
    n = int(round(np.log2(u.shape[0])))
    return all(_pauli_image(u, s) is not None for s in pauli_letters(n))


def is_restricted_clifford(u: np.ndarray) -> bool:
    """True iff conjugation by u maps Paulis to Paulis and keeps BD and ABD apart."""
    u = np.asarray(u, dtype=complex)
    n = int(round(np.log2(u.shape[0])))
    for s in pauli_letters(n):
        img = _pauli_image(u, s)
        if img is None:
            return False
        if PauliElement(1, s).is_bd != PauliElement(1, img[1]).is_bd:
            return False
    return True


def canonical_key(m: np.ndarray, grid: float = 1e-9) -> bytes:
    """Hash key of m modulo global phase: first nonzero entry made real positive."""
    flat = m.ravel()
    k = int(np.flatnonzero(np.abs(flat) > 1e-6)[0])
    m = m * (abs(flat[k]) / flat[k])
    r = np.round(np.concatenate([m.real.ravel(), m.imag.ravel()]) / grid).astype(np.int64)
    r[r == 0] = 0
    return r.tobytes()


def canonical_phase(m: np.ndarray) -> np.ndarray:
    flat = m.ravel()
    k = int(np.flatnonzero(np.abs(flat) > 1e-6)[0])
    return m * (abs(flat[k]) / flat[k])


@dataclass(frozen=True)
class CliffordElement:
    matrix: np.ndarray = field(compare=False)
    key: bytes = field(repr=False)

    @cached_property
    def pauli_action(self) -> dict[str, tuple[int, str]]:
        """letters -> (sign, image letters) under u P u^dag."""
        n = int(round(np.log2(self.matrix.shape[0])))
        out = {}
        for s in pauli_letters(n):
            phase, img = _pauli_image(self.matrix, s)
            out[s] = (int(round(phase.real)), img)
        return out


def clifford_generators(n: int) -> list[np.ndarray]:
    """Phase and Hadamard gates on each mode plus a CZ-type gate on neighbouring modes."""
    s = np.diag([1, 1j])
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    gens = []
    for j in range(n):
        for g in (s, h):
            mats = [np.eye(2, dtype=complex)] * n
            mats[j] = g
            out = np.ones((1, 1), dtype=complex)
            for mm in mats:
                out = np.kron(mm, out)
            gens.append(out)
    for j in range(n - 1):
        lo, hi = 1 << j, 1 << (j + 1)
        diag = [(-1.0 if (b & lo and b & hi) else 1.0) for b in range(2**n)]
        gens.append(np.diag(diag).astype(complex))
    return gens


class BudgetExceeded(RuntimeError):
    pass


def enumerate_clifford(n: int, budget: int = 10**6) -> list[np.ndarray]:
    """All Clifford phase-classes reachable from the generators (breadth-first)."""
    n = check_modes(n)
    gens = clifford_generators(n)
    start = np.eye(2**n, dtype=complex)
    seen = {canonical_key(start): start}
    frontier = [start]
    while frontier:
        nxt = []
        for u in frontier:
            for g in gens:
                v = canonical_phase(g @ u)
                k = canonical_key(v)
                if k not in seen:
                    seen[k] = v
                    nxt.append(v)
                    if len(seen) > budget:
                        raise BudgetExceeded(f"more than {budget} phase-classes visited")
        frontier = nxt
        log.debug("clifford bfs n=%d: %d classes", n, len(seen))
    return list(seen.values())


@lru_cache(maxsize=None)
def _restricted(n: int, budget: int) -> tuple[CliffordElement, ...]:
    out = []
    for u in enumerate_clifford(n, budget):
        if is_restricted_clifford(u):
            out.append(CliffordElement(u, canonical_key(u)))
    return tuple(out)


def restricted_clifford(n: int, budget: int = 10**6, allow_large: bool = False) -> tuple[CliffordElement, ...]:
    """Phase-classes of Clifford unitaries preserving both the BD and ABD Pauli sets."""
    n = check_modes(n)
    if n > 2 and not allow_large:
        raise BudgetExceeded("exhaustive enumeration is limited to n <= 2 (pass allow_large=True)")
    return _restricted(n, budget)


def restricted_clifford_matrices(n: int) -> np.ndarray:
    return np.stack([c.matrix for c in restricted_clifford(n)])
