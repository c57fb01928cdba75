"""N x N-mode fermionic teleportation: resources, Bell family, protocol and closed forms.

Party layout for the four-party protocol (n modes each, in mode order):
A' (input reference), At (teleported input), A (Alice's resource half), B (Bob).
The joint storage index is a' + d at + d^2 a + d^3 b.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fock import check_modes, creation_monomial_state, parities, symmetric_split, wedge_state
from .groups import letters_matrix, pauli_letters
from .pssr import PSSRViolation, check_global_pssr, loc_p, loc_p_bar, partial_trace
from .twirl import TwirlCoefficients, canonical_operators


@dataclass(frozen=True)
class ResourceState:
    matrix: np.ndarray
    upsilon: float
    kind: str  # omega_f | omega_noise | arbitrary
    n: int


@dataclass(frozen=True)
class BellFamily:
    vectors: np.ndarray  # row x: |Psi_x> on (At, A)
    projectors: np.ndarray
    unitaries: np.ndarray
    labels: tuple


def omega_vector(n: int) -> np.ndarray:
    """(1/sqrt d) sum_s |s>_A ^ |s>_B built from creation monomials."""
    n = check_modes(n)
    sp = symmetric_split(n)
    d = 2**n
    out = np.zeros(d * d, dtype=complex)
    for s in range(d):
        modes = [j + 1 for j in range(n) if s >> j & 1]
        ket = creation_monomial_state(modes, n)
        out += wedge_state(ket, ket, sp)
    return out / np.sqrt(d)


def resource_state(n: int, upsilon: float) -> ResourceState:
    w = omega_vector(n)
    ww = np.outer(w, w.conj())
    sp = symmetric_split(n)
    return ResourceState(loc_p(ww, sp) + upsilon * loc_p_bar(ww, sp), float(upsilon), "omega_f", n)


def noisy_resource(coeffs: TwirlCoefficients, n: int) -> ResourceState:
    """alpha d^2 (I^I/d^2 + upsilon1 Sz^Sz/d^2) + beta d omega(upsilon)."""
    d = 2**n
    ops = canonical_operators(n)
    m = coeffs.alpha * (np.eye(d * d) + coeffs.upsilon1 * ops.sz_sz)
    m = m + coeffs.beta * d * resource_state(n, coeffs.upsilon).matrix
    return ResourceState(m, coeffs.upsilon, "omega_noise", n)


def is_psd(m: np.ndarray, tol: float = 1e-10) -> bool:
    return bool(np.linalg.eigvalsh(m).min() > -tol)


def upsilon_feasible_interval(n: int, lo: float = -4.0, hi: float = 4.0, tol: float = 1e-12) -> tuple[float, float]:
    """Numerically mapped interval of upsilon for which omega(upsilon) is PSD."""

    def ok(u):
        return is_psd(resource_state(n, u).matrix, tol=1e-13)

    if not ok(0.0):
        raise RuntimeError("omega(0) is not PSD")

    def edge(inside, outside):
        while abs(outside - inside) > tol:
            mid = (inside + outside) / 2
            inside, outside = (mid, outside) if ok(mid) else (inside, mid)
        return inside

    return edge(0.0, lo), edge(0.0, hi)


def bell_family(n: int) -> BellFamily:
    """Bell basis (U_x ^ I)|omega> with U_x running over the Hermitian Pauli strings."""
    w = omega_vector(n)
    d = 2**n
    labels = tuple(pauli_letters(n))
    us = np.stack([letters_matrix(s) for s in labels])
    eye = np.eye(d)
    vecs = np.stack([np.kron(eye, u) @ w for u in us])
    projs = np.einsum("xi,xj->xij", vecs, vecs.conj())
    return BellFamily(vecs, projs, us, labels)


def _check_input(rho_in: np.ndarray, n: int):
    d = 2**n
    if rho_in.shape != (d * d, d * d):
        raise ValueError(f"input must be a {d*d} x {d*d} matrix for n={n}")
    if not check_global_pssr(rho_in):
        raise PSSRViolation("teleportation input violates parity superselection")


def _conditional_states(rho_in: np.ndarray, resource: ResourceState) -> tuple[np.ndarray, BellFamily]:
    """Unnormalised post-measurement states on (A', B) for each Bell outcome."""
    n = resource.n
    d = 2**n
    fam = bell_family(n)
    r = np.asarray(rho_in).reshape(d, d, d, d)  # (at, a', at', a'')
    w = np.asarray(resource.matrix).reshape(d, d, d, d)  # (b, a, b', a')
    psi = fam.vectors.reshape(-1, d, d)  # (x, a, at)
    # sum over at, a, at', a' of <Psi_x|(at,a)> rho(at..) omega(a..) <(at',a')|Psi_x>
    out = np.einsum("xau,uivj,bawc,xcv->xbiwj", psi.conj(), r, w, psi, optimize=True)
    return out.reshape(len(psi), d * d, d * d), fam


def teleport_run(rho_in: np.ndarray, resource: ResourceState) -> np.ndarray:
    """Output on (A', B): sum_x (I ^ U_x^dag) rho_x (I ^ U_x)."""
    n = resource.n
    rho_in = np.asarray(rho_in, dtype=complex)
    _check_input(rho_in, n)
    cond, fam = _conditional_states(rho_in, resource)
    eye = np.eye(2**n)
    out = np.zeros_like(cond[0])
    for x in range(len(fam.labels)):
        c = np.kron(fam.unitaries[x].conj().T, eye)
        out += c @ cond[x] @ c.conj().T
    return out


def outcome_probabilities(rho_in: np.ndarray, resource: ResourceState) -> np.ndarray:
    cond, _ = _conditional_states(np.asarray(rho_in, dtype=complex), resource)
    return np.real(np.trace(cond, axis1=1, axis2=2))


def local_statistics_sides(rho_in, resource: ResourceState, obs_ref, obs_b) -> tuple[float, float]:
    """Both sides of the local-indistinguishability identity.

    lhs: sum_x tr((rho_in ^ omega)(O_A' ^ M_x ^ U_x O_B U_x^dag)) on the four-party space.
    rhs: tr(rho_in (O_A' ^ O_B)), the input read with At relabelled as B.
    """
    n = resource.n
    rho_in = np.asarray(rho_in, dtype=complex)
    _check_input(rho_in, n)
    fam = bell_family(n)
    joint = np.kron(resource.matrix, rho_in)  # modes A', At, A, B
    lhs = 0.0
    for x in range(len(fam.labels)):
        u = fam.unitaries[x]
        ob = u @ obs_b @ u.conj().T
        # projector on (At, A): index at + d a, embedded between A' and B
        op = np.kron(ob, np.kron(fam.projectors[x], obs_ref))
        lhs += np.real(np.vdot(op.conj().T, joint))
    rhs = np.real(np.trace(rho_in @ np.kron(obs_b, obs_ref)))
    return float(lhs), float(rhs)


def noisy_output_closed_form(psi_in: np.ndarray, coeffs: TwirlCoefficients, n: int) -> np.ndarray:
    """Closed-form teleported output for a pure input of definite parity."""
    n = check_modes(n)
    d = 2**n
    psi = np.asarray(psi_in, dtype=complex)
    p = parities(2 * n)
    weight_odd = np.linalg.norm(psi[p == 1]) ** 2
    if 1e-12 < weight_odd < 1 - 1e-12:
        raise ValueError("input has indefinite global parity; split it into parity sectors first")
    sign = -1.0 if weight_odd > 0.5 else 1.0
    sp = symmetric_split(n)
    pp = np.outer(psi, psi.conj())
    rho_ref = partial_trace(pp, sp, "A")
    base = np.kron(np.eye(d), rho_ref)
    noisy = (base + sign * coeffs.upsilon1 * base @ canonical_operators(n).sz_sz) / d
    exact = loc_p(pp, sp) + coeffs.upsilon * loc_p_bar(pp, sp)
    return coeffs.alpha * d**2 * noisy + coeffs.beta * d * exact


# --- distinguishable-particle reference -------------------------------------------------


def weyl_operators(d: int) -> list[np.ndarray]:
    """The d^2 clock-and-shift unitaries X^a Z^b."""
    w = np.exp(2j * np.pi / d)
    x = np.roll(np.eye(d), 1, axis=0)
    z = np.diag(w ** np.arange(d))
    return [np.linalg.matrix_power(x, a) @ np.linalg.matrix_power(z, b) for a in range(d) for b in range(d)]


def sqt_teleport_reference(rho_in: np.ndarray, resource: np.ndarray, d: int) -> np.ndarray:
    """Standard qudit teleportation with tensor products (A' x At x A x B, A'-major).

    rho_in is on A' x At and resource on A x B, both in the usual tensor order
    (first factor most significant). Returns the A' x B output.
    """
    phi = np.eye(d).ravel() / np.sqrt(d)
    joint = np.kron(rho_in, resource).reshape([d] * 8)
    out = np.zeros((d * d, d * d), dtype=complex)
    for u in weyl_operators(d):
        v = (np.kron(u, np.eye(d)) @ phi).reshape(d, d)  # (at, a)
        cond = np.einsum("ta,rtaBsuvC,uv->rBsC", v.conj(), joint, v).reshape(d * d, d * d)
        c = np.kron(np.eye(d), u)
        out += c @ cond @ c.conj().T
    return out


def teleport_channel(resource: ResourceState):
    """The At -> B channel implemented by the protocol, from its Choi state."""
    from .channel import kraus_from_choi, psi_plus

    out = teleport_run(psi_plus(resource.n), resource)
    return kraus_from_choi(out, resource.n)
