"""Parity-structured unitaries and observables.

Every stochastic function takes ``seed``: an int, a ``numpy.random.SeedSequence``
or a ``numpy.random.Generator``. Parallel workers should use disjoint streams from
:func:`spawn_seeds`.
"""

from __future__ import annotations

import numpy as np

from .fock import check_modes, creation, even_states, odd_states, structure


def rng_from(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def spawn_seeds(seed, k: int) -> list[np.random.SeedSequence]:
    """k independent child streams of one root seed."""
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return root.spawn(k)


def haar_unitary(dim: int, rng: np.random.Generator, batch: int | None = None) -> np.ndarray:
    """Haar-random unitary (or a stack of ``batch`` of them) via phase-fixed QR."""
    shape = (dim, dim) if batch is None else (batch, dim, dim)
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[..., None, :]


def _assemble_bd(even: np.ndarray, odd: np.ndarray, n: int) -> np.ndarray:
    ev, od = even_states(n), odd_states(n)
    shape = even.shape[:-2] + (2**n, 2**n)
    u = np.zeros(shape, dtype=complex)
    u[..., ev[:, None], ev[None, :]] = even
    u[..., od[:, None], od[None, :]] = odd
    return u


def random_bd_unitary(n: int, seed=None) -> np.ndarray:
    """Block-diagonal unitary with independent Haar even and odd blocks."""
    n = check_modes(n)
    rng = rng_from(seed)
    m = 2 ** (n - 1)
    return _assemble_bd(haar_unitary(m, rng), haar_unitary(m, rng), n)


def parity_flip(n: int) -> np.ndarray:
    """f_1^dag + f_1: the fixed ABD coset representative (Hermitian)."""
    c = creation(1, check_modes(n))
    return (c + c.T).astype(complex)


def random_abd_unitary(n: int, seed=None) -> np.ndarray:
    return parity_flip(n) @ random_bd_unitary(n, seed)


def sample_u_res(n: int, seed=None) -> tuple[np.ndarray, str]:
    """One Haar draw from the restricted set: fair coin between the BD and ABD cosets."""
    rng = rng_from(seed)
    if rng.random() < 0.5:
        return random_bd_unitary(n, rng), "BD"
    return random_abd_unitary(n, rng), "ABD"


def sample_u_res_batch(n: int, m: int, seed=None) -> tuple[np.ndarray, np.ndarray]:
    """m restricted-Haar draws at once; returns (unitaries, is_abd flags)."""
    n = check_modes(n)
    rng = rng_from(seed)
    half = 2 ** (n - 1)
    flags = rng.random(m) < 0.5
    u = _assemble_bd(haar_unitary(half, rng, m), haar_unitary(half, rng, m), n)
    x = parity_flip(n)
    u[flags] = x @ u[flags]
    return u, flags


def embed_abd(u: np.ndarray) -> np.ndarray:
    """Ancilla embedding U_c ^ u with U_c = f_c^dag + f_c on a new first mode.

    The result is BD on n + 1 modes. Restricted to an empty ancilla it acts as
    ``|0_c> ^ |x>  ->  |1_c> ^ u|x>``, so every matrix element of ``u`` is
    reproduced with sign +1.
    """
    u = np.asarray(u)
    if structure(u) != "ABD":
        raise ValueError("embed_abd expects an anti-block-diagonal unitary")
    return np.kron(u, parity_flip(1))


def random_local_observable(n: int, seed=None) -> np.ndarray:
    """Hermitian BD observable with Gaussian block entries."""
    n = check_modes(n)
    rng = rng_from(seed)
    m = 2 ** (n - 1)

    def herm():
        g = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        return (g + g.conj().T) / 2

    return _assemble_bd(herm(), herm(), n)


def random_haar_state(dim: int, seed=None) -> np.ndarray:
    rng = rng_from(seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_parity_state(n: int, parity: int, seed=None) -> np.ndarray:
    """Haar-random pure state supported on one parity sector of n modes."""
    idx = even_states(n) if parity == 0 else odd_states(n)
    v = np.zeros(2**n, dtype=complex)
    v[idx] = random_haar_state(len(idx), seed)
    return v


def random_pssr_density(n: int, seed=None, rank: int | None = None) -> np.ndarray:
    """Random density matrix that is block diagonal in global parity."""
    rng = rng_from(seed)
    m = 2 ** (n - 1)
    r = m if rank is None else rank

    def block():
        g = rng.standard_normal((m, r)) + 1j * rng.standard_normal((m, r))
        return g @ g.conj().T

    rho = _assemble_bd(block(), block(), n)
    return rho / np.trace(rho).real
