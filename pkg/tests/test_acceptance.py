"""Acceptance criteria, one test each; a PASS/FAIL line per criterion is printed in the summary."""

import itertools
import time

import numpy as np

from conftest import ACCEPTANCE_LINES
from ftelep.channel import (
    channel_twirl,
    choi,
    dephasing_channel,
    identity_channel,
    kraus_from_choi,
    random_channel,
    trace_preservation_residual,
)
from ftelep.cli import example_state_report
from ftelep.fidelity import avg_separable_fidelity, fidelity_lower_bound, fidelity_twirl_invariance_test, separable_fidelity
from ftelep.fock import annihilation, creation, symmetric_split
from ftelep.groups import canonical_key, is_restricted_clifford, restricted_clifford
from ftelep.ops import random_local_observable, random_parity_state, random_pssr_density, spawn_seeds
from ftelep.teleport import (
    noisy_output_closed_form,
    noisy_resource,
    resource_state,
    teleport_channel,
    teleport_run,
    local_statistics_sides,
)
from ftelep.twirl import (
    TwirlCoefficients,
    canonical_operators,
    clifford_twirl,
    clifford_twirl_conj,
    haar_twirl_mc,
    invariant_overlaps,
    span_residual,
)


def record(num, title, passed, detail):
    ACCEPTANCE_LINES.append(f"criterion {num:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}")
    assert passed, detail


def test_01_car_algebra_exact():
    t0 = time.perf_counter()
    worst = 0
    for n in range(1, 5):
        eye = np.eye(2**n, dtype=np.int64)
        c = {j: creation(j, n).astype(np.int64) for j in range(1, n + 1)}
        a = {j: annihilation(j, n).astype(np.int64) for j in range(1, n + 1)}
        for i, j in itertools.product(range(1, n + 1), repeat=2):
            worst = max(worst, np.abs(a[i] @ c[j] + c[j] @ a[i] - eye * (i == j)).max(),
                        np.abs(c[i] @ c[j] + c[j] @ c[i]).max(), np.abs(a[i] @ a[j] + a[j] @ a[i]).max())
    dt = time.perf_counter() - t0
    record(1, "CAR algebra exact at n <= 4", worst == 0 and dt < 1, f"max integer residual {worst}, {dt:.3f} s")


def test_02_local_statistics_teleported():
    t0 = time.perf_counter()
    worst = 0.0
    for n, draws in ((1, 50), (2, 10)):
        for k, s in enumerate(spawn_seeds(2, 2 * draws)):
            rng = np.random.default_rng(s)
            psi = random_parity_state(2 * n, k % 2, rng)
            lhs, rhs = local_statistics_sides(np.outer(psi, psi.conj()), resource_state(n, rng.uniform(-1, 1)),
                                      random_local_observable(n, rng), random_local_observable(n, rng))
            worst = max(worst, abs(lhs - rhs))
    dt = time.perf_counter() - t0
    record(2, "local-statistics identity of teleportation", worst < 1e-9 and dt < 60,
           f"max residual {worst:.2e} over 100 (n=1) + 20 (n=2) inputs, {dt:.2f} s")


def test_03_twirl_projects_onto_invariants():
    t0 = time.perf_counter()
    sp = symmetric_split(1)
    basis = canonical_operators(1).werner_basis
    span = idem = adj = 0.0
    for s in spawn_seeds(3, 20):
        rng = np.random.default_rng(s)
        rho, sigma = random_pssr_density(2, rng), random_pssr_density(2, rng)
        t = clifford_twirl(rho, sp)
        span = max(span, span_residual(t, basis))
        idem = max(idem, np.abs(clifford_twirl(t, sp) - t).max())
        adj = max(adj, abs(np.vdot(sigma, t) - np.vdot(clifford_twirl(sigma, sp), rho)))
    dt = time.perf_counter() - t0
    ok = max(span, idem, adj) < 1e-10 and dt < 30
    record(3, "twirl lands in the 4-operator span", ok,
           f"span {span:.1e}, idempotence {idem:.1e}, self-adjointness {adj:.1e}, {dt:.2f} s")


def test_04_clifford_matches_haar():
    t0 = time.perf_counter()
    sp = symmetric_split(1)
    m = 10**5
    gaps = []
    for s in spawn_seeds(4, 20):
        rng = np.random.default_rng(s)
        rho = random_pssr_density(2, rng)
        gaps.append(np.linalg.norm(haar_twirl_mc(rho, sp, m, rng) - clifford_twirl(rho, sp)))
    dt = time.perf_counter() - t0
    limit = 5 / np.sqrt(m)
    record(4, "restricted Clifford set is a 2-design", max(gaps) <= limit and dt < 120,
           f"max Frobenius gap {max(gaps):.2e} <= {limit:.2e}, {dt:.2f} s")


def test_05_overlaps_invariant():
    sp = symmetric_split(1)
    worst = 0.0
    for s in spawn_seeds(5, 20):
        rng = np.random.default_rng(s)
        rho = random_pssr_density(2, rng)
        base = invariant_overlaps(rho, sp)
        for t in (clifford_twirl(rho, sp), haar_twirl_mc(rho, sp, 2000, rng)):
            worst = max(worst, np.abs(invariant_overlaps(t, sp) - base).max())
    record(5, "invariant overlaps unchanged by both twirls", worst < 1e-10, f"max change {worst:.1e}")


def test_06_choi_kraus_round_trip():
    rt = tp = 0.0
    for s in spawn_seeds(6, 20):
        ch = random_channel(1, s)
        c = choi(ch)
        back = kraus_from_choi(c, 1)
        rt = max(rt, np.abs(choi(back) - c).max())
        tp = max(tp, trace_preservation_residual(back), trace_preservation_residual(ch))
    record(6, "state-channel isomorphism round trip", rt < 1e-9 and tp < 1e-10,
           f"round trip {rt:.1e}, trace preservation {tp:.1e}")


def test_07_choi_of_twirled_channel():
    sp = symmetric_split(1)
    worst = 0.0
    for s in spawn_seeds(7, 10):
        ch = random_channel(1, s)
        worst = max(worst, np.abs(choi(channel_twirl(ch)) - clifford_twirl_conj(choi(ch), sp)).max())
    record(7, "Choi state of the twirled channel is the conjugate-twirled Choi state", worst < 1e-10,
           f"max residual {worst:.1e}")


def test_08_noisy_output_closed_form():
    worst = 0.0
    d = 2
    for k, s in enumerate(spawn_seeds(8, 40)):
        rng = np.random.default_rng(s)
        lam, u1, ups = rng.uniform(0, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)
        coeffs = TwirlCoefficients.from_resource(lam / d**2, (1 - lam) / d, u1, ups)
        psi = random_parity_state(2, k % 2, rng)
        out = teleport_run(np.outer(psi, psi.conj()), noisy_resource(coeffs, 1))
        worst = max(worst, np.abs(out - noisy_output_closed_form(psi, coeffs, 1)).max())
    record(8, "closed-form noisy output equals protocol simulation", worst < 1e-9,
           f"max residual {worst:.1e} over 20 even + 20 odd inputs")


def test_09_exact_case_fidelity():
    sp = symmetric_split(1)
    ch = teleport_channel(resource_state(1, 1.0))
    est = avg_separable_fidelity(ch, 1, 100, seed=9)  # 100 per sector = 200 states
    per = 0.0
    for k, s in enumerate(spawn_seeds(90, 20)):
        psi = random_parity_state(2, k % 2, s)
        rho = np.outer(psi, psi.conj())
        per = max(per, abs(separable_fidelity(rho, teleport_run(rho, resource_state(1, 1.0)), sp).value - 1))
    ok = abs(est.value - 1) < 1e-6 and per < 1e-8
    record(9, "exact teleportation has separable fidelity 1", ok,
           f"average {est.value:.12f}, worst per-sample deviation {per:.1e}")


CANONICAL = [(0.2, 0.9, 1.0), (0.5, 0.5, 0.5), (0.8, -0.3, -0.5), (1.0, 1.0, 0.0), (0.6, -1.0, 1.0)]


def test_10_lower_bound_dominated():
    t0 = time.perf_counter()
    d = 2
    details, ok = [], True
    for k, (lam, u1, ups) in enumerate(CANONICAL):
        coeffs = TwirlCoefficients.from_resource(lam / d**2, (1 - lam) / d, u1, ups)
        est = avg_separable_fidelity(teleport_channel(noisy_resource(coeffs, 1)), 1, 100, seed=100 + k)
        lb = fidelity_lower_bound(coeffs, 1, 20000, seed=200 + k)
        # the upsilon1 = -1 case is tight, so rounding gets the algebraic floor
        ok &= lb <= est.value + 3 * est.stderr + 1e-12
        details.append(f"{lb:.4f}<={est.value:.4f}")
    dt = time.perf_counter() - t0
    record(10, "lower bound below the average separable fidelity", ok and dt < 600,
           f"{', '.join(details)}, {dt:.2f} s")


def test_11_fidelity_twirl_invariance():
    channels = {"identity": identity_channel(1), "dephasing": dephasing_channel(1),
                "exact teleport": teleport_channel(resource_state(1, 1.0))}
    reports = {k: fidelity_twirl_invariance_test(ch, 1, 100, seed=11) for k, ch in channels.items()}
    ok = all(r["passed"] for r in reports.values())
    record(11, "average separable fidelity unchanged by channel twirling", ok,
           "; ".join(f"{k} diff {r['difference']:.1e}" for k, r in reports.items()))


def test_12_example_state_table():
    t0 = time.perf_counter()
    rows = {a: example_state_report(a) for a in (-1, -0.5, 0, 0.5, 1)}
    dt = time.perf_counter() - t0
    ok = all(r["trace"] == 1.0 for r in rows.values()) and dt < 5
    flagged = [a for a, r in rows.items()
               if r["eigen_mismatch"] > 1e-12 or abs(r["negativity"] - r["claimed_negativity"]) > 1e-12]
    detail = ", ".join(f"a={a}: eig {r['eigenvalues'][0]:.2f}/{r['eigenvalues'][1]:.2f} "
                       f"N={r['negativity']:.1e} (claimed {r['claimed_negativity']:.1f})" for a, r in rows.items())
    record(12, "16x16 example state table", ok, f"{detail}; claims flagged at a in {flagged}; {dt:.3f} s")


def test_13_restricted_clifford_enumeration():
    one = restricted_clifford(1)
    keys = {e.key for e in one}
    closed = all(canonical_key(a.matrix @ b.matrix) in keys for a in one for b in one)
    inverses = all(canonical_key(a.matrix.conj().T) in keys for a in one)
    two = restricted_clifford(2)
    valid = all(is_restricted_clifford(e.matrix) for e in two)
    ok = closed and inverses and len(one) == 8 and valid
    record(13, "restricted Clifford enumeration", ok,
           f"n=1: {len(one)} classes, closed={closed}, inverses={inverses}; n=2: {len(two)} classes, all valid={valid}")
