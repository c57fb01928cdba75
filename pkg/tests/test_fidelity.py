import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ftelep.channel import dephasing_channel, identity_channel, random_channel
from ftelep.fidelity import (
    OptimizerConfig,
    avg_separable_fidelity,
    fidelity_lower_bound,
    fidelity_twirl_invariance_test,
    reduced_purities,
    separable_fidelity,
    uhlmann,
)
from ftelep.fock import symmetric_split
from ftelep.ops import random_bd_unitary, random_parity_state, random_pssr_density
from ftelep.pssr import partial_trace
from ftelep.teleport import noisy_resource, resource_state, teleport_channel, teleport_run
from ftelep.twirl import TwirlCoefficients

FAST = OptimizerConfig(restarts=3, max_iter=100)


def qubit_fidelity_oracle(rho, sigma):
    # closed form for 2 x 2 density matrices
    return np.real(np.trace(rho @ sigma) + 2 * np.sqrt(np.linalg.det(rho) * np.linalg.det(sigma)))


def test_uhlmann_against_qubit_closed_form():
    rng = np.random.default_rng(0)
    for _ in range(50):
        g = [rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)) for _ in range(2)]
        rho, sigma = (x @ x.conj().T / np.trace(x @ x.conj().T) for x in g)
        assert abs(uhlmann(rho, sigma) - qubit_fidelity_oracle(rho, sigma)) < 1e-10


def test_uhlmann_edge_cases():
    rho = random_pssr_density(2, seed=1)
    assert abs(uhlmann(rho, rho) - 1) < 1e-10
    assert uhlmann(np.diag([1.0, 0]), np.diag([0, 1.0])) < 1e-12


def rotation(theta):
    return np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])


def test_commuting_pair_against_grid_search():
    sp = symmetric_split(1)
    rho = np.diag([0.4, 0.1, 0.2, 0.3])
    sigma = np.diag([0.1, 0.3, 0.5, 0.1])
    est = separable_fidelity(rho, sigma, sp)
    best = np.inf
    grid = np.linspace(0, np.pi, 61)
    for ta in grid:
        for tb in grid:
            u = np.kron(rotation(tb), rotation(ta))
            p = np.diag(u.T @ rho @ u)
            q = np.diag(u.T @ sigma @ u)
            best = min(best, np.sum(np.sqrt(np.clip(p * q, 0, None))) ** 2)
    assert abs(est.value - best) < 1e-4
    assert est.kind == "upper-estimate-of-min"


@given(st.integers(0, 10**6))
@settings(max_examples=25, deadline=None)
def test_floor_and_symmetry_single_mode(seed):
    sp = symmetric_split(1)
    rho, sigma = random_pssr_density(2, seed), random_pssr_density(2, seed + 1)
    a = separable_fidelity(rho, sigma, sp).value
    b = separable_fidelity(sigma, rho, sp).value
    assert a >= uhlmann(rho, sigma) - 1e-8
    assert abs(a - b) < 1e-6
    assert 0 <= a <= 1 + 1e-9


def test_two_mode_optimizer_properties():
    sp = symmetric_split(2)
    rho, sigma = random_pssr_density(4, seed=3), random_pssr_density(4, seed=4)
    est = separable_fidelity(rho, sigma, sp, FAST, seed=0)
    assert est.value >= uhlmann(rho, sigma) - 1e-8
    assert all(f <= f0 + 1e-15 for f0, f in est.report["restart_values"])
    assert est.value == min(f for _, f in est.report["restart_values"])
    assert abs(est.value - separable_fidelity(sigma, rho, sp, FAST, seed=0).value) < 1e-6
    assert abs(separable_fidelity(rho, rho, sp, FAST, seed=0).value - 1) < 1e-12


def test_non_convergence_is_reported():
    sp = symmetric_split(2)
    rho, sigma = random_pssr_density(4, seed=3), random_pssr_density(4, seed=4)
    est = separable_fidelity(rho, sigma, sp, OptimizerConfig(restarts=1, max_iter=1), seed=0)
    assert est.report["converged"] is False


@pytest.mark.parametrize("n", [1, 2])
def test_exact_channel_is_locally_indistinguishable(n):
    sp = symmetric_split(n)
    for seed in range(3):
        psi = random_parity_state(2 * n, seed % 2, seed)
        rho = np.outer(psi, psi.conj())
        for ups in (1.0, 0.0):
            out = teleport_run(rho, resource_state(n, ups))
            assert abs(separable_fidelity(rho, out, sp, FAST, seed).value - 1) < 1e-8


def test_identity_average_is_one():
    est = avg_separable_fidelity(identity_channel(1), 1, 20, seed=0)
    assert abs(est.value - 1) < 1e-12 and est.stderr < 1e-12


def test_parallel_sampling_is_deterministic():
    ch = random_channel(1, seed=2)
    a = avg_separable_fidelity(ch, 1, 16, seed=3, workers=1)
    b = avg_separable_fidelity(ch, 1, 16, seed=3, workers=2)
    assert a.value == b.value


def test_bound_reductions():
    # exact resource: alpha = 0, beta d = 1
    c = TwirlCoefficients.from_resource(0.0, 0.5, 0.0, 1.0)
    assert abs(fidelity_lower_bound(c, 1, 100, seed=0) - 1) < 1e-12
    # pure noise, upsilon1 = 0: E[purity] / d with E[purity] = 2/3 for one mode per party
    c = TwirlCoefficients.from_resource(0.25, 0.0, 0.0, 1.0)
    pur = reduced_purities(1, 20000, seed=1)
    assert abs(fidelity_lower_bound(c, 1, 20000, seed=1) - pur.mean() / 2) < 1e-12
    assert abs(pur.mean() - 2 / 3) < 3 * pur.std() / np.sqrt(len(pur))


def test_fiducial_independence_within_sector():
    sp = symmetric_split(1)
    rng = np.random.default_rng(5)
    m = 4000

    def purity(fid):
        v = np.zeros(4, dtype=complex)
        v[fid] = 1
        out = []
        for _ in range(m):
            psi = random_bd_unitary(2, rng) @ v
            r = partial_trace(np.outer(psi, psi.conj()), sp, "A")
            out.append(np.real(np.vdot(r, r)))
        return np.array(out)

    a, b = purity(0), purity(3)
    assert abs(a.mean() - b.mean()) < 3 * np.hypot(a.std(), b.std()) / np.sqrt(m)


def test_noisy_channel_respects_bound():
    d = 2
    c = TwirlCoefficients.from_resource(0.7 / d**2, 0.3 / d, 0.4, 0.2)
    ch = teleport_channel(noisy_resource(c, 1))
    est = avg_separable_fidelity(ch, 1, 50, seed=0)
    # closed form for one mode per party: 1 - lambda + lambda (1 + upsilon1) / 2
    assert abs(est.value - (1 - 0.7 + 0.7 * 1.4 / 2)) < 1e-12
    assert fidelity_lower_bound(c, 1, 5000, seed=1) <= est.value + 3 * est.stderr + 1e-12


@pytest.mark.parametrize("make", [identity_channel, dephasing_channel,
                                  lambda n: teleport_channel(resource_state(n, 1.0))])
def test_twirl_invariance(make):
    report = fidelity_twirl_invariance_test(make(1), 1, 50, seed=0)
    assert report["passed"]
