"""Parity superselection checks, local-parity projections, partial trace and transpose."""

from __future__ import annotations

import numpy as np

from .fock import BipartiteSplit, mode_count, parities, split_parities

ALGEBRAIC_TOL = 1e-12
SPECTRAL_TOL = 1e-10


class PSSRViolation(ValueError):
    """Raised when a physical operation receives a state that breaks parity superselection."""


def check_global_pssr(rho: np.ndarray, tol: float = ALGEBRAIC_TOL) -> bool:
    rho = np.asarray(rho)
    p = parities(mode_count(rho))
    cross = p[:, None] != p[None, :]
    return bool(np.abs(rho[cross]).max(initial=0.0) < tol)


def _local_mask(split: BipartiteSplit) -> np.ndarray:
    pa, pb = split_parities(split)
    return (pa[:, None] == pa[None, :]) & (pb[:, None] == pb[None, :])


def check_local_pssr(rho: np.ndarray, split: BipartiteSplit, tol: float = ALGEBRAIC_TOL) -> bool:
    rho = np.asarray(rho)
    return bool(np.abs(rho[~_local_mask(split)]).max(initial=0.0) < tol)


def loc_p(x: np.ndarray, split: BipartiteSplit) -> np.ndarray:
    """Keep entries whose row and column carry equal local parity on both sides."""
    return np.where(_local_mask(split), x, 0)


def loc_p_bar(x: np.ndarray, split: BipartiteSplit) -> np.ndarray:
    return np.where(_local_mask(split), 0, x)


def pssr_status(rho: np.ndarray, split: BipartiteSplit | None = None) -> str:
    if not check_global_pssr(rho):
        return "violating"
    if split is not None and check_local_pssr(rho, split):
        return "local-respecting"
    return "global-respecting"


def is_density_matrix(rho: np.ndarray, tol: float = SPECTRAL_TOL) -> bool:
    rho = np.asarray(rho)
    if np.abs(rho - rho.conj().T).max() > ALGEBRAIC_TOL:
        return False
    if abs(np.trace(rho) - 1) > ALGEBRAIC_TOL * rho.shape[0]:
        return False
    return bool(np.linalg.eigvalsh(rho).min() > -tol)


def _blocks(rho: np.ndarray, split: BipartiteSplit) -> np.ndarray:
    # axes: (b, a, b', a') because the joint index is a + d_a * b
    return np.asarray(rho).reshape(split.d_b, split.d_a, split.d_b, split.d_a)


def partial_trace(rho: np.ndarray, split: BipartiteSplit, keep: str = "A") -> np.ndarray:
    """Reduced state on A or B.

    Satisfies tr(O rho_A) = tr((O ^ I) rho) for every parity-respecting O.
    """
    if not check_global_pssr(rho):
        raise PSSRViolation("partial trace of a state with even/odd coherences is not defined")
    t = _blocks(rho, split)
    if keep == "A":
        return np.einsum("kikj->ij", t)
    if keep == "B":
        return np.einsum("ikjk->ij", t)
    raise ValueError("keep must be 'A' or 'B'")


def partial_transpose_f(rho: np.ndarray, split: BipartiteSplit) -> np.ndarray:
    """(I ^ T_f): transpose the B factor, leaving A untouched.

    Maps |x><x'| ^ |y><y'| to |x><x'| ^ |y'><y|; an involution that preserves the
    trace and the local-parity block pattern.
    """
    t = _blocks(rho, split)
    return t.transpose(2, 1, 0, 3).reshape(split.dim, split.dim)


def is_operational_product(rho: np.ndarray, split: BipartiteSplit, tol: float = SPECTRAL_TOL) -> bool:
    if not check_local_pssr(rho, split):
        return False
    ra = partial_trace(rho, split, "A")
    rb = partial_trace(rho, split, "B")
    return bool(np.abs(np.kron(rb, ra) - rho).max() < tol)


def negativity(rho: np.ndarray, split: BipartiteSplit) -> float:
    """(||rho^{T_B}||_1 - 1) / 2 for the standard partial transpose."""
    ev = np.linalg.eigvalsh(partial_transpose_f(rho, split))
    return float((np.abs(ev).sum() - 1) / 2)


def ppt_separability_witness(rho: np.ndarray, split: BipartiteSplit, tol: float = SPECTRAL_TOL) -> str:
    """'separable' / 'entangled' / 'inconclusive' from the partial-transpose spectrum.

    PPT is decisive only for a 2 x 2 split (one mode per side).
    """
    ev = np.linalg.eigvalsh(partial_transpose_f(rho, split))
    if ev.min() < -tol:
        return "entangled"
    if split.d_a == 2 and split.d_b == 2:
        return "separable"
    return "inconclusive"
