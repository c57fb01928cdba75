"""Occupation-number representation of an n-mode fermionic Fock space.

Storage order: basis state ``b`` (an integer bitmask) sits at vector index ``b``;
bit ``j-1`` set means mode ``j`` is occupied. For a bipartite split the A modes
are ``1..n_a`` (low bits) and the B modes are ``n_a+1..n_a+n_b`` (high bits), so
the joint index of ``|x>_A ^ |y>_B`` is ``x + (y << n_a)``.

Creation operators use the chain (Jordan-Wigner) convention: ``f_j^dag`` is a
Z-string on modes ``1..j-1``, the raising matrix on mode ``j`` and identity on
the rest. With that convention ``f_S^dag f_T^dag |0>`` for A-modes ``S`` placed
before B-modes ``T`` carries no reordering sign, which is why the wedge product of
states and of ket-bra operators reduces to a Kronecker product in this layout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_MODES = 6


def check_modes(n: int) -> int:
    if not isinstance(n, (int, np.integer)) or n < 1 or n > MAX_MODES:
        raise ValueError(f"mode count must be an integer in [1, {MAX_MODES}], got {n!r}")
    return int(n)


@dataclass(frozen=True)
class BipartiteSplit:
    """A|B partition: A owns modes 1..n_a, B owns modes n_a+1..n_a+n_b."""

    n_a: int
    n_b: int

    def __post_init__(self):
        check_modes(self.n_a)
        check_modes(self.n_b)

    @property
    def d_a(self) -> int:
        return 2**self.n_a

    @property
    def d_b(self) -> int:
        return 2**self.n_b

    @property
    def dim(self) -> int:
        return 2 ** (self.n_a + self.n_b)

    @property
    def symmetric(self) -> bool:
        return self.n_a == self.n_b


def symmetric_split(n: int) -> BipartiteSplit:
    return BipartiteSplit(n, n)


def popcount_parity(bits: np.ndarray | int):
    bits = np.asarray(bits, dtype=np.int64)
    out = np.zeros_like(bits)
    while np.any(bits):
        out ^= bits & 1
        bits = bits >> 1
    return out


def parities(n: int) -> np.ndarray:
    """Parity (0 even, 1 odd) of every basis index of an n-mode space."""
    return popcount_parity(np.arange(2**n))


def parity_order(n: int) -> np.ndarray:
    """Permutation taking storage order to the parity-sorted view.

    ``v[parity_order(n)]`` lists the even-parity components first, each block in
    increasing bitmask order.
    """
    p = parities(n)
    idx = np.arange(2**n)
    return np.concatenate([idx[p == 0], idx[p == 1]])


def even_states(n: int) -> np.ndarray:
    return np.flatnonzero(parities(n) == 0)


def odd_states(n: int) -> np.ndarray:
    return np.flatnonzero(parities(n) == 1)


def parity_operator(n: int) -> np.ndarray:
    """(-1)^N as a diagonal matrix: +1 on even states, -1 on odd."""
    return np.diag(1.0 - 2.0 * parities(n))


def creation(mode: int, n: int) -> np.ndarray:
    """Matrix of f_mode^dag on n modes (real, entries in {0, +1, -1})."""
    n = check_modes(n)
    if not 1 <= mode <= n:
        raise ValueError(f"mode {mode} out of range 1..{n}")
    dim = 2**n
    bit = 1 << (mode - 1)
    lower = bit - 1
    out = np.zeros((dim, dim))
    for b in range(dim):
        if b & bit:
            continue
        sign = -1.0 if bin(b & lower).count("1") % 2 else 1.0
        out[b | bit, b] = sign
    return out


def annihilation(mode: int, n: int) -> np.ndarray:
    return creation(mode, n).T.copy()


def basis_state(bits: int, n: int) -> np.ndarray:
    v = np.zeros(2 ** check_modes(n), dtype=complex)
    v[bits] = 1.0
    return v


def vacuum(n: int) -> np.ndarray:
    return basis_state(0, n)


def creation_monomial_state(modes, n: int) -> np.ndarray:
    """f_{j1}^dag f_{j2}^dag ... f_{jk}^dag |0> for the listed modes."""
    v = vacuum(n)
    for j in reversed(list(modes)):
        v = creation(j, n) @ v
    return v


def mode_count(x: np.ndarray) -> int:
    """Number of modes n of a 2^n-dimensional vector or matrix."""
    dim = x.shape[0]
    n = int(round(np.log2(dim)))
    if 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def structure(op: np.ndarray, tol: float = 1e-12) -> str:
    """'BD', 'ABD' or 'mixed' according to the parity zero pattern.

    The zero matrix counts as BD.
    """
    op = np.asarray(op)
    p = parities(mode_count(op))
    same = p[:, None] == p[None, :]
    off_bd = np.abs(op[~same]).max(initial=0.0)
    off_abd = np.abs(op[same]).max(initial=0.0)
    if off_bd < tol:
        return "BD"
    if off_abd < tol:
        return "ABD"
    return "mixed"


def wedge_state(a: np.ndarray, b: np.ndarray, split: BipartiteSplit) -> np.ndarray:
    """|a>_A ^ |b>_B on the joint n_a + n_b mode space."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != (split.d_a,) or b.shape != (split.d_b,):
        raise ValueError(
            f"expected vectors of length {split.d_a} and {split.d_b}, got {a.shape} and {b.shape}"
        )
    return np.kron(b, a)


def wedge_op(op_a: np.ndarray, op_b: np.ndarray, split: BipartiteSplit) -> np.ndarray:
    """Wedge product of parity-homogeneous local operators.

    Defined on ket-bra pairs by ``|a><a'| ^ |b><b'| = |a^b><a'^b'|`` and extended
    linearly, so ``(op_a ^ op_b)(x ^ y) = (op_a x) ^ (op_b y)`` with sign +1 for
    every parity combination.
    """
    op_a = np.asarray(op_a)
    op_b = np.asarray(op_b)
    if op_a.shape != (split.d_a, split.d_a) or op_b.shape != (split.d_b, split.d_b):
        raise ValueError("operator shapes do not match the split")
    if structure(op_a) == "mixed" or structure(op_b) == "mixed":
        raise ValueError("mixed-parity operator: decompose into BD and ABD parts first")
    return np.kron(op_b, op_a)


def chain_embed(op_a: np.ndarray, op_b: np.ndarray, split: BipartiteSplit) -> np.ndarray:
    """Product (op_a on A modes)(op_b on B modes) inside the joint CAR algebra.

    An odd B operator picks up the A parity string, so for example
    ``chain_embed(I, creation(1, n_b))`` equals ``creation(n_a + 1, n_a + n_b)``.
    """
    sa, sb = structure(op_a), structure(op_b)
    if "mixed" in (sa, sb):
        raise ValueError("mixed-parity operator: decompose into BD and ABD parts first")
    a = np.asarray(op_a)
    if sb == "ABD":
        a = a @ parity_operator(split.n_a)
    return np.kron(np.asarray(op_b), a)


def split_parities(split: BipartiteSplit) -> tuple[np.ndarray, np.ndarray]:
    """Local A and B parities of every joint basis index."""
    idx = np.arange(split.dim)
    return popcount_parity(idx & (split.d_a - 1)), popcount_parity(idx >> split.n_a)
