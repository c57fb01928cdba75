"""Uhlmann and separable (product-measurement) fidelities, channel averages and the lower bound.

The separable fidelity is estimated over products of local orthonormal bases
that respect each party's parity, i.e. bases given by the columns of local BD
unitaries. Each local unitary is parameterised by exponential coordinates on
the off-diagonal part of its parity blocks; diagonal generators only rephase
basis vectors and never change outcome probabilities, so they are dropped.
With one mode per party there is nothing left to optimise and the estimate is
the computational-basis value.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm, sqrtm

from .channel import FermionicChannel, apply_second, channel_twirl
from .fock import BipartiteSplit, even_states, odd_states, symmetric_split
from .ops import random_bd_unitary, rng_from, sample_u_res_batch, spawn_seeds
from .pssr import partial_trace
from .twirl import TwirlCoefficients


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 16
    max_iter: int = 500
    tol: float = 1e-8
    step: float = 0.5


@dataclass(frozen=True)
class FidelityEstimate:
    value: float
    kind: str  # exact | upper-estimate-of-min | monte-carlo
    stderr: float = 0.0
    report: dict = field(default_factory=dict)


def uhlmann(rho: np.ndarray, sigma: np.ndarray) -> float:
    """(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2."""
    s = sqrtm(np.asarray(rho, dtype=complex))
    inner = s @ np.asarray(sigma, dtype=complex) @ s
    w = np.linalg.eigvalsh((inner + inner.conj().T) / 2)
    return float(np.sum(np.sqrt(np.clip(w, 0, None))) ** 2)


def bhattacharyya_sq(p: np.ndarray, q: np.ndarray) -> float:
    return float(np.sum(np.sqrt(np.clip(p, 0, None) * np.clip(q, 0, None))) ** 2)


def _block_generators(n_modes: int) -> list[np.ndarray]:
    """Off-diagonal Hermitian generators inside the even and odd blocks."""
    d = 2**n_modes
    gens = []
    for blk in (even_states(n_modes), odd_states(n_modes)):
        for i in range(len(blk)):
            for j in range(i + 1, len(blk)):
                for val in (1.0, 1j):
                    g = np.zeros((d, d), dtype=complex)
                    g[blk[i], blk[j]] = val
                    g[blk[j], blk[i]] = np.conj(val)
                    gens.append(g)
    return gens


class _ProductBasis:
    """Outcome distributions of the product basis kron(U_B, U_A) for a fixed state pair."""

    def __init__(self, rho, sigma, split: BipartiteSplit):
        self.rho, self.sigma, self.split = rho, sigma, split
        self.gen_a = _block_generators(split.n_a)
        self.gen_b = _block_generators(split.n_b)
        self.dim = len(self.gen_a) + len(self.gen_b)

    def unitary(self, base_a, base_b, theta):
        ka = len(self.gen_a)
        ua, ub = base_a, base_b
        if ka:
            ua = base_a @ expm(1j * np.tensordot(theta[:ka], self.gen_a, axes=1))
        if len(self.gen_b):
            ub = base_b @ expm(1j * np.tensordot(theta[ka:], self.gen_b, axes=1))
        return np.kron(ub, ua)

    def value(self, u) -> float:
        p = np.real(np.einsum("ji,jk,ki->i", u.conj(), self.rho, u))
        q = np.real(np.einsum("ji,jk,ki->i", u.conj(), self.sigma, u))
        return bhattacharyya_sq(p, q)


def _descend(obj: _ProductBasis, base_a, base_b, cfg: OptimizerConfig):
    """Coordinate descent with step halving; returns (start, best, iterations, converged)."""
    theta = np.zeros(obj.dim)
    f0 = best = obj.value(obj.unitary(base_a, base_b, theta))
    step = cfg.step
    it = 0
    while it < cfg.max_iter:
        it += 1
        improved = False
        for k in range(obj.dim):
            for sgn in (1.0, -1.0):
                trial = theta.copy()
                trial[k] += sgn * step
                f = obj.value(obj.unitary(base_a, base_b, trial))
                if f < best - cfg.tol * 1e-3:
                    theta, best, improved = trial, f, True
                    break
        if not improved:
            step /= 2
            if step < cfg.tol:
                return f0, best, it, True
    return f0, best, it, False


def separable_fidelity(rho, sigma, split: BipartiteSplit, cfg: OptimizerConfig | None = None, seed=None) -> FidelityEstimate:
    """Minimum squared Bhattacharyya overlap over parity-respecting product bases.

    The first restart starts from the computational basis; later restarts from
    random local BD unitaries. The value is the least over restarts.
    """
    cfg = cfg or OptimizerConfig()
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape or rho.shape != (split.dim, split.dim):
        raise ValueError("states must live on the given split")
    obj = _ProductBasis(rho, sigma, split)
    if obj.dim == 0:
        v = obj.value(np.eye(split.dim))
        return FidelityEstimate(v, "upper-estimate-of-min", 0.0,
                                {"restarts": 0, "iterations": 0, "converged": True})
    rng = rng_from(seed)
    best, total_it, all_conv, trace = np.inf, 0, True, []
    for r in range(cfg.restarts):
        if r == 0:
            ba, bb = np.eye(split.d_a, dtype=complex), np.eye(split.d_b, dtype=complex)
        else:
            ba, bb = random_bd_unitary(split.n_a, rng), random_bd_unitary(split.n_b, rng)
        f0, f, it, conv = _descend(obj, ba, bb, cfg)
        trace.append((f0, f))
        best = min(best, f)
        total_it += it
        all_conv &= conv
    return FidelityEstimate(float(best), "upper-estimate-of-min", 0.0,
                            {"restarts": cfg.restarts, "iterations": total_it, "converged": all_conv,
                             "restart_values": trace})


def fiducial(n: int, parity: int) -> np.ndarray:
    """Empty state (even) or mode 1 occupied (odd) on the 2n-mode input space."""
    v = np.zeros(4**n, dtype=complex)
    v[parity] = 1.0
    return v


def _sample_fidelity(args):
    channel, n, parity, cfg, seed = args
    rng = rng_from(seed)
    psi = random_bd_unitary(2 * n, rng) @ fiducial(n, parity)
    rho = np.outer(psi, psi.conj())
    out = apply_second(channel, rho)
    return separable_fidelity(rho, out, symmetric_split(n), cfg, rng).value


def _workers() -> int:
    return max(1, int(os.environ.get("FTELEP_WORKERS", "1")))


def sector_fidelities(channel: FermionicChannel, n: int, n_samples: int, cfg=None, seed=None,
                      workers: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample separable fidelities for n_samples even and n_samples odd inputs."""
    cfg = cfg or OptimizerConfig()
    seeds = spawn_seeds(seed, 2 * n_samples)
    jobs = [(channel, n, k // n_samples, cfg, s) for k, s in enumerate(seeds)]
    workers = workers or _workers()
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            vals = list(pool.map(_sample_fidelity, jobs, chunksize=8))
    else:
        vals = [_sample_fidelity(j) for j in jobs]
    vals = np.array(vals)
    return vals[:n_samples], vals[n_samples:]


def avg_separable_fidelity(channel: FermionicChannel, n: int, n_samples: int, cfg=None, seed=None,
                           workers: int | None = None) -> FidelityEstimate:
    """Monte-Carlo average of the separable fidelity, each parity sector weighted 1/2."""
    even, odd = sector_fidelities(channel, n, n_samples, cfg, seed, workers)

    def se(x):
        return float(np.std(x, ddof=1) / np.sqrt(len(x))) if len(x) > 1 else 0.0

    value = 0.5 * (even.mean() + odd.mean())
    stderr = 0.5 * np.hypot(se(even), se(odd))
    return FidelityEstimate(float(value), "monte-carlo", float(stderr),
                            {"even_mean": float(even.mean()), "odd_mean": float(odd.mean()),
                             "samples_per_sector": n_samples, "sector_weights": (0.5, 0.5)})


def reduced_purities(n: int, mc_samples: int, seed=None) -> np.ndarray:
    """tr(rho_ref^2) for restricted-Haar draws applied to the even fiducial."""
    u, _ = sample_u_res_batch(2 * n, mc_samples, seed)
    psi = u[:, :, 0]  # columns hitting the empty fiducial
    sp = symmetric_split(n)
    out = np.empty(mc_samples)
    for k, v in enumerate(psi):
        r = partial_trace(np.outer(v, v.conj()), sp, "A")
        out[k] = np.real(np.vdot(r, r))
    return out


def fidelity_lower_bound(coeffs: TwirlCoefficients, n: int, mc_samples: int, seed=None) -> float:
    """alpha d^2 (1 + upsilon1) E[purity] / d + beta d."""
    d = 2**n
    purity = reduced_purities(n, mc_samples, seed).mean()
    return float(coeffs.alpha * d**2 * (1 + coeffs.upsilon1) * purity / d + coeffs.beta * d)


def fidelity_twirl_invariance_test(channel: FermionicChannel, n: int, n_samples: int = 200, cfg=None,
                                   seed=None, floor: float = 1e-9) -> dict:
    """Compare the average separable fidelity of a channel and of its restricted Clifford twirl.

    Both estimates use the same input samples. With zero sampling error on both
    sides the comparison falls back to an absolute floor.
    """
    a = avg_separable_fidelity(channel, n, n_samples, cfg, seed)
    b = avg_separable_fidelity(channel_twirl(channel), n, n_samples, cfg, seed)
    sigma = float(np.hypot(a.stderr, b.stderr))
    diff = abs(a.value - b.value)
    return {"original": a.value, "twirled": b.value, "difference": diff, "sigma": sigma,
            "passed": bool(diff <= max(3 * sigma, floor))}
