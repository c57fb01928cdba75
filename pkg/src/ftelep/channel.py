"""Fermionic channels as parity-tagged Kraus sets and the state-channel isomorphism."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fock import check_modes, parities, structure, symmetric_split
from .groups import restricted_clifford_matrices
from .ops import rng_from
from .pssr import PSSRViolation, check_global_pssr, partial_trace
from .twirl import canonical_operators

KRAUS_CUTOFF = 1e-12


@dataclass(frozen=True)
class FermionicChannel:
    """Operator-sum channel sum_m w_m K_m rho K_m^dag with tags 'BD' or 'ABD'."""

    kraus: tuple  # of (matrix, tag, weight)
    n: int

    def __post_init__(self):
        d = 2 ** check_modes(self.n)
        for k, tag, w in self.kraus:
            if k.shape != (d, d):
                raise ValueError("Kraus operator has the wrong shape")
            if tag not in ("BD", "ABD") or (structure(k) != tag and np.abs(k).max() > 1e-12):
                raise ValueError(f"Kraus operator does not match its tag {tag!r}")
            if w < 0:
                raise ValueError("Kraus weights must be non-negative")

    @classmethod
    def from_matrices(cls, mats, n: int) -> "FermionicChannel":
        """Tag each matrix by its zero pattern, weights 1."""
        return cls(tuple((np.asarray(m, dtype=complex), structure(m), 1.0) for m in mats), n)


def identity_channel(n: int) -> FermionicChannel:
    return FermionicChannel(((np.eye(2**n, dtype=complex), "BD", 1.0),), n)


def dephasing_channel(n: int) -> FermionicChannel:
    """Kraus {P_even, P_odd}: removes coherence between parity sectors."""
    p = parities(n)
    return FermionicChannel(
        ((np.diag(p == 0).astype(complex), "BD", 1.0), (np.diag(p == 1).astype(complex), "BD", 1.0)), n
    )


def random_channel(n: int, seed=None, n_bd: int = 2, n_abd: int = 2) -> FermionicChannel:
    """Random trace-preserving channel with n_bd BD and n_abd ABD Kraus operators."""
    n = check_modes(n)
    rng = rng_from(seed)
    d = 2**n
    same = np.equal.outer(parities(n), parities(n))
    mats = []
    for count, mask in ((n_bd, same), (n_abd, ~same)):
        for _ in range(count):
            g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            mats.append(np.where(mask, g, 0))
    z = sum(k.conj().T @ k for k in mats)
    # z is BD; normalise with z^{-1/2}
    w, v = np.linalg.eigh(z)
    inv_sqrt = v @ np.diag(w**-0.5) @ v.conj().T
    mats = [k @ inv_sqrt for k in mats]
    return FermionicChannel.from_matrices(mats, n)


def apply(channel: FermionicChannel, rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho)
    return sum(w * k @ rho @ k.conj().T for k, _, w in channel.kraus)


def apply_second(channel: FermionicChannel, rho: np.ndarray) -> np.ndarray:
    """(I ^ E)(rho) on a symmetric split, E acting on the B factor."""
    eye = np.eye(2**channel.n)
    out = 0
    for k, _, w in channel.kraus:
        kk = np.kron(k, eye)
        out = out + w * kk @ rho @ kk.conj().T
    return out


def psi_plus(n: int) -> np.ndarray:
    """Normalised |psi+><psi+|_f = (Psi_ee + Psi_eo) / d."""
    ops = canonical_operators(n)
    return (ops.psi_ee + ops.psi_eo) / 2**n


def choi(channel: FermionicChannel) -> np.ndarray:
    return apply_second(channel, psi_plus(channel.n))


def trace_preservation_residual(channel: FermionicChannel) -> float:
    """max |Z^f - I| with Z^f = sum_m w_m K_m^dag K_m."""
    z = sum(w * k.conj().T @ k for k, _, w in channel.kraus)
    return float(np.abs(z - np.eye(z.shape[0])).max())


def kraus_from_choi(rho_choi: np.ndarray, n: int | None = None) -> FermionicChannel:
    """Parity-tagged Kraus set from the spectral decomposition of a Choi state.

    The Choi state is block diagonal in global parity, so each parity block is
    diagonalised on its own; even eigenvectors give BD Kraus operators and odd
    ones ABD. K = sqrt(d) * eigenvector reshaped to (B, A), weight = eigenvalue.
    """
    rho_choi = np.asarray(rho_choi)
    if n is None:
        n = int(round(np.log2(rho_choi.shape[0]))) // 2
    d = 2**n
    if not check_global_pssr(rho_choi):
        raise PSSRViolation("Choi state mixes global parity sectors")
    p = parities(2 * n)
    kraus = []
    for par, tag in ((0, "BD"), (1, "ABD")):
        idx = np.flatnonzero(p == par)
        w, v = np.linalg.eigh(rho_choi[np.ix_(idx, idx)])
        for lam, vec in zip(w, v.T):
            if lam <= KRAUS_CUTOFF:
                continue
            full = np.zeros(d * d, dtype=complex)
            full[idx] = vec
            k = np.sqrt(d) * full.reshape(d, d)
            if structure(k) not in (tag,):
                raise PSSRViolation("eigenvector of indefinite local parity structure")
            kraus.append((k, tag, float(lam)))
    return FermionicChannel(tuple(kraus), n)


def channel_twirl(channel: FermionicChannel) -> FermionicChannel:
    """(1/|C|) sum_c c^dag o E o c, as an enlarged Kraus set."""
    cs = restricted_clifford_matrices(channel.n)
    scale = 1.0 / len(cs)
    kraus = []
    for c in cs:
        for k, _, w in channel.kraus:
            kk = c.conj().T @ k @ c
            kraus.append((kk, structure(kk), w * scale))
    return FermionicChannel(tuple(kraus), channel.n)


def sector_matrix_units(n: int):
    """All basis matrix units |i><j| (even-even, odd-odd and the two coherence sectors)."""
    d = 2**n
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1.0
            yield e


def choi_injectivity_check(e1: FermionicChannel, e2: FermionicChannel, tol: float = 1e-10) -> bool:
    """True iff the Choi states agree; cross-checked against the action on matrix units."""
    same_choi = bool(np.abs(choi(e1) - choi(e2)).max() < tol)
    same_action = all(np.abs(apply(e1, b) - apply(e2, b)).max() < tol for b in sector_matrix_units(e1.n))
    if same_choi != same_action:
        raise AssertionError("Choi equality and action equality disagree")
    return same_choi


def remix_kraus(channel: FermionicChannel, seed=None) -> FermionicChannel:
    """Same channel, different Kraus set: mix each parity class by a random unitary."""
    rng = rng_from(seed)
    out = []
    for tag in ("BD", "ABD"):
        ks = [np.sqrt(w) * k for k, t, w in channel.kraus if t == tag]
        if not ks:
            continue
        m = len(ks)
        z = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        q, _ = np.linalg.qr(z)
        for i in range(m):
            out.append((sum(q[i, j] * ks[j] for j in range(m)), tag, 1.0))
    return FermionicChannel(tuple(out), channel.n)


def choi_reduction_residual(rho_choi: np.ndarray, n: int) -> float:
    """|tr_B(choi) - I/d| where the first factor A is kept."""
    red = partial_trace(rho_choi, symmetric_split(n), "A")
    return float(np.abs(red - np.eye(2**n) / 2**n).max())
