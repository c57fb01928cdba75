"""Restricted Clifford twirls, the Monte-Carlo Haar twirl and the invariant operators."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fock import BipartiteSplit, check_modes, even_states, odd_states, parity_operator, symmetric_split
from .groups import restricted_clifford_matrices
from .ops import sample_u_res_batch
from .pssr import partial_transpose_f


@dataclass(frozen=True)
class CanonicalOperators:
    i_ee: np.ndarray
    i_oo: np.ndarray
    h_ee: np.ndarray
    h_oo: np.ndarray
    psi_ee: np.ndarray
    psi_eo: np.ndarray
    sz_sz: np.ndarray

    @property
    def werner_basis(self) -> list[np.ndarray]:
        return [self.i_ee, self.i_oo, self.h_ee, self.h_oo]

    @property
    def isotropic_basis(self) -> list[np.ndarray]:
        return [self.i_ee, self.i_oo, self.psi_ee, self.psi_eo]


def _ketbra_sum(n: int, pairs) -> np.ndarray:
    """Sum of |x ^ y><x' ^ y'| over ((x, y), (x', y')) label pairs."""
    d = 2**n
    out = np.zeros((d * d, d * d))
    for (x, y), (xp, yp) in pairs:
        out[x + d * y, xp + d * yp] += 1.0
    return out


@lru_cache(maxsize=None)
def canonical_operators(n: int) -> CanonicalOperators:
    n = check_modes(n)
    ev, od = list(even_states(n)), list(odd_states(n))
    same = [(i, j) for blk in (ev, od) for i in blk for j in blk]
    mixed = [(i, j) for a, b in ((ev, od), (od, ev)) for i in a for j in b]
    i_ee = _ketbra_sum(n, [((i, j), (i, j)) for i, j in same])
    i_oo = _ketbra_sum(n, [((i, j), (i, j)) for i, j in mixed])
    h_ee = _ketbra_sum(n, [((i, j), (j, i)) for i, j in same])
    h_oo = _ketbra_sum(n, [((i, j), (j, i)) for i, j in mixed])
    psi_ee = _ketbra_sum(n, [((i, i), (j, j)) for blk in (ev, od) for i in blk for j in blk])
    psi_eo = _ketbra_sum(n, [((i, i), (j, j)) for a, b in ((ev, od), (od, ev)) for i in a for j in b])
    pz = parity_operator(n)
    return CanonicalOperators(i_ee, i_oo, h_ee, h_oo, psi_ee, psi_eo, np.kron(pz, pz))


def _check_symmetric(split: BipartiteSplit) -> int:
    if not split.symmetric:
        raise ValueError("twirls are defined only for equal-size parties")
    return split.n_a


def _conjugate_mean(rho: np.ndarray, left: np.ndarray) -> np.ndarray:
    # mean over k of L_k rho L_k^dag, with a fixed (sequential) reduction order
    tmp = np.matmul(left, rho)
    return np.matmul(tmp, left.conj().transpose(0, 2, 1)).mean(axis=0)


@lru_cache(maxsize=None)
def _clifford_pairs(n: int, conj: bool) -> np.ndarray:
    cs = restricted_clifford_matrices(n)
    second = cs.conj() if conj else cs
    return np.einsum("kij,kab->kiajb", second, cs).reshape(len(cs), 4**n, 4**n)


def clifford_twirl(rho: np.ndarray, split: BipartiteSplit) -> np.ndarray:
    """(1/|C|) sum_c (c ^ c) rho (c ^ c)^dag over the restricted Clifford set."""
    n = _check_symmetric(split)
    return _conjugate_mean(np.asarray(rho, dtype=complex), _clifford_pairs(n, False))


def clifford_twirl_conj(rho: np.ndarray, split: BipartiteSplit) -> np.ndarray:
    """(1/|C|) sum_c (c ^ c*) rho (c ^ c*)^dag."""
    n = _check_symmetric(split)
    return _conjugate_mean(np.asarray(rho, dtype=complex), _clifford_pairs(n, True))


def haar_twirl_mc(rho: np.ndarray, split: BipartiteSplit, samples: int, seed=None, batch: int = 20000) -> np.ndarray:
    """Empirical mean of (U ^ U) rho (U ^ U)^dag over restricted-Haar draws."""
    n = _check_symmetric(split)
    rho = np.asarray(rho, dtype=complex)
    d = 2**n
    rng = np.random.default_rng(seed)
    total = np.zeros_like(rho)
    done = 0
    while done < samples:
        m = min(batch, samples - done)
        u, _ = sample_u_res_batch(n, m, rng)
        uu = np.einsum("kij,kab->kiajb", u, u).reshape(m, d * d, d * d)
        total += _conjugate_mean(rho, uu) * m
        done += m
    return total / samples


def invariant_overlaps(rho: np.ndarray, split: BipartiteSplit) -> np.ndarray:
    """(tr rho, tr rho Sz^Sz, tr rho H_ee, tr rho H_oo)."""
    n = _check_symmetric(split)
    ops = canonical_operators(n)
    rho = np.asarray(rho)
    return np.array(
        [np.trace(rho).real]
        + [np.real(np.vdot(o, rho)) for o in (ops.sz_sz, ops.h_ee, ops.h_oo)]
    )


def _overlap_design(n: int) -> np.ndarray:
    """Row k: overlaps of the k-th Werner basis operator."""
    ops = canonical_operators(n)
    sp = symmetric_split(n)
    return np.array([invariant_overlaps(b, sp) for b in ops.werner_basis])


@dataclass(frozen=True)
class TwirlCoefficients:
    """Weights on (i_ee, i_oo, h_ee, h_oo) and the equivalent resource parameters.

    The resource parameters describe the noisy teleportation resource
    alpha (I ^ I + upsilon1 Sz ^ Sz) + beta d omega(upsilon); its partial
    transpose on B has Werner weights a_e = alpha (1 + upsilon1),
    a_o = alpha (1 - upsilon1), b_e = beta, b_o = beta upsilon.
    """

    a_e: float
    a_o: float
    b_e: float
    b_o: float
    alpha: float
    beta: float
    upsilon1: float
    upsilon: float

    @classmethod
    def from_werner(cls, a_e, a_o, b_e, b_o) -> "TwirlCoefficients":
        alpha = (a_e + a_o) / 2
        upsilon1 = (a_e - a_o) / (a_e + a_o) if abs(a_e + a_o) > 1e-15 else 0.0
        upsilon = b_o / b_e if abs(b_e) > 1e-15 else 1.0
        return cls(a_e, a_o, b_e, b_o, alpha, b_e, upsilon1, upsilon)

    @classmethod
    def from_resource(cls, alpha, beta, upsilon1, upsilon) -> "TwirlCoefficients":
        return cls(alpha * (1 + upsilon1), alpha * (1 - upsilon1), beta, beta * upsilon,
                   alpha, beta, upsilon1, upsilon)

    def werner_state(self, n: int) -> np.ndarray:
        ops = canonical_operators(n)
        return self.a_e * ops.i_ee + self.a_o * ops.i_oo + self.b_e * ops.h_ee + self.b_o * ops.h_oo

    def resource_state(self, n: int) -> np.ndarray:
        return partial_transpose_f(self.werner_state(n), symmetric_split(n))


def canonical_coeffs(overlaps, n: int) -> TwirlCoefficients:
    """Werner weights reproducing the given invariant overlaps.

    Solves the Gram system of the four invariant operators. For n = 1 the
    operators i_ee and h_ee coincide, so only a_e + b_e is determined; the split
    is then fixed by taking upsilon = 1 (b_e = b_o).
    """
    n = check_modes(n)
    t = np.asarray(overlaps, dtype=float)
    g = _overlap_design(n).T  # column k = overlaps of basis operator k
    if n == 1:
        # basis (i_ee = h_ee, i_oo, h_oo); then split the first weight
        x, *_ = np.linalg.lstsq(g[:, [0, 1, 3]], t, rcond=None)
        s, a_o, b_o = x
        b_e = b_o
        return TwirlCoefficients.from_werner(s - b_e, a_o, b_e, b_o)
    if abs(np.linalg.det(g)) < 1e-12:
        raise np.linalg.LinAlgError("singular Gram matrix for the invariant operators")
    return TwirlCoefficients.from_werner(*np.linalg.solve(g, t))


def span_residual(x: np.ndarray, basis) -> float:
    """Frobenius distance from x to span(basis)."""
    a = np.stack([np.asarray(b).ravel() for b in basis], axis=1)
    coef, *_ = np.linalg.lstsq(a, np.asarray(x).ravel(), rcond=None)
    return float(np.linalg.norm(a @ coef - np.asarray(x).ravel()))
