"""Brute-force master-equation evolution on a truncated Fock space.

This is the ground-truth solver: density matrices for one atom (or an
entangled atom pair) coupled to the driven cavity, evolved with the
full dissipative generator.  Dimensions stay at desk scale (at most
4 * (N + 1) with the default N = 12), so everything is dense numpy.

Atom basis ordering is [ground, excited], giving sz = diag(-1, +1).
Tensor ordering is atom1 (x) atom2 (x) cavity in joint mode and
atom (x) cavity in single mode.

Steady states are found by time evolution rather than a Liouvillian
null-space solve: with the atomic decay off, the generator has one
steady state per atomic-inversion sector, and time evolution selects
the physical combination fixed by the initial atomic populations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .core import (
    BellLikeState,
    DensityOperator,
    MomentVector,
    Params,
    SolverError,
    validate_params,
)
from .analytic import sigma_z_of_state
from .moments import check_time_step, default_time_step

SIGMA_Z = np.diag([-1.0 + 0j, 1.0 + 0j])
SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)


class SteadyStateNotReached(SolverError):
    """Residual failed to drop below tolerance within the time budget."""


@dataclass(frozen=True)
class LiouvillianSpec:
    """Configuration of one master-equation problem.

    atom_mode 'single' simulates atom 1 and the cavity; 'joint' adds
    atom 2 as a pure spectator: it has no Hamiltonian term (its undriven
    cavity stays in vacuum, making the dispersive term inert) and no
    dissipator (both atomic decays are off during the measurement).
    include_atom_decay switches the gamma1 dissipator on atom 1.
    omega_a1 is the bare atomic splitting retained in the Hamiltonian;
    it commutes with every measured observable, so it defaults to 0.
    """

    params: Params
    fock_cutoff: int = 12
    atom_mode: str = "single"
    include_atom_decay: bool = False
    omega_a1: float = 0.0

    def __post_init__(self) -> None:
        if self.fock_cutoff < 2:
            raise ValueError(f"fock_cutoff must be at least 2, got {self.fock_cutoff}")
        if self.atom_mode not in ("single", "joint"):
            raise ValueError(f"atom_mode must be 'single' or 'joint', got {self.atom_mode!r}")

    @property
    def atom_dim(self) -> int:
        return 2 if self.atom_mode == "single" else 4

    @property
    def dim(self) -> int:
        return self.atom_dim * (self.fock_cutoff + 1)


def ladder(n_levels: int) -> np.ndarray:
    """Truncated annihilation operator on Fock levels 0..n_levels-1."""
    return np.diag(np.sqrt(np.arange(1.0, n_levels)), k=1).astype(complex)


@lru_cache(maxsize=None)
def _cavity_ops(fock_cutoff: int) -> dict:
    a = ladder(fock_cutoff + 1)
    ad = a.conj().T
    n = ad @ a
    return {
        "a": a, "ad": ad, "n": n,
        "ad2_a2": ad @ ad @ a @ a,
        "ad2_a": ad @ ad @ a,
        "ad_a2": ad @ a @ a,
        "ad2": ad @ ad,
        "a2": a @ a,
        "eye": np.eye(fock_cutoff + 1, dtype=complex),
    }


def _atom1_op(op2: np.ndarray, atom_dim: int) -> np.ndarray:
    """Lift a single-atom operator to the (possibly joint) atomic space."""
    if atom_dim == 2:
        return op2
    return np.kron(op2, np.eye(2, dtype=complex))


def build_hamiltonian(spec: LiouvillianSpec) -> np.ndarray:
    """Hermitian generator: detuned, dispersively shifted, driven cavity.

    H = (omega_a1/2) sz + (delta_r + chi sz) a+ a + epsilon (a+ + a),
    all lifted to the full space; atom 2 contributes nothing in joint
    mode.  Restricted to one atomic sector this is a driven oscillator
    with effective detuning delta_r +/- chi.
    """
    p = spec.params
    cav = _cavity_ops(spec.fock_cutoff)
    sz1 = _atom1_op(SIGMA_Z, spec.atom_dim)
    eye_atom = np.eye(spec.atom_dim, dtype=complex)
    h = (
        0.5 * spec.omega_a1 * np.kron(sz1, cav["eye"])
        + p.delta_r * np.kron(eye_atom, cav["n"])
        + p.chi * np.kron(sz1, cav["n"])
        + p.epsilon * np.kron(eye_atom, cav["ad"] + cav["a"])
    )
    return h


def build_collapse_ops(spec: LiouvillianSpec) -> list[np.ndarray]:
    """Jump operators scaled by sqrt(rate): cavity decay, optional atom decay."""
    p = spec.params
    cav = _cavity_ops(spec.fock_cutoff)
    eye_atom = np.eye(spec.atom_dim, dtype=complex)
    ops = [math.sqrt(p.kappa1) * np.kron(eye_atom, cav["a"])]
    if spec.include_atom_decay and p.gamma1 > 0:
        sm1 = _atom1_op(SIGMA_MINUS, spec.atom_dim)
        ops.append(math.sqrt(p.gamma1) * np.kron(sm1, cav["eye"]))
    return ops


def _make_rhs(spec: LiouvillianSpec):
    """Closure computing d(rho)/dt for the full dissipative generator."""
    h = build_hamiltonian(spec)
    c_ops = build_collapse_ops(spec)
    h_eff = -1j * h - 0.5 * sum(c.conj().T @ c for c in c_ops)
    h_eff_dag = h_eff.conj().T
    c_pairs = [(c, c.conj().T) for c in c_ops]

    def rhs(rho: np.ndarray) -> np.ndarray:
        out = h_eff @ rho + rho @ h_eff_dag
        for c, cdag in c_pairs:
            out += c @ rho @ cdag
        return out

    return rhs


def _check_dims(rho0: DensityOperator, spec: LiouvillianSpec) -> None:
    if rho0.atom_dim != spec.atom_dim or rho0.fock_cutoff != spec.fock_cutoff:
        raise ValueError(
            f"density matrix dims (atom_dim={rho0.atom_dim}, N={rho0.fock_cutoff}) "
            f"do not match spec (atom_dim={spec.atom_dim}, N={spec.fock_cutoff})"
        )


def density_trajectory(
    rho0: DensityOperator,
    spec: LiouvillianSpec,
    t_final: float,
    dt: float | None = None,
    store_every: int = 1,
) -> Iterator[tuple[float, DensityOperator]]:
    """RK4 trajectory of the master equation, yielding (t, rho) samples."""
    _check_dims(rho0, spec)
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    if dt is None:
        dt = default_time_step(spec.params)
    check_time_step(spec.params, dt)
    if store_every < 1:
        raise ValueError("store_every must be at least 1")

    rhs = _make_rhs(spec)
    rho = np.array(rho0.entries, dtype=complex)
    yield 0.0, rho0

    n_full = int(math.floor(t_final / dt + 1e-9))
    remainder = t_final - n_full * dt

    def rk4_step(y: np.ndarray, h: float) -> np.ndarray:
        k1 = rhs(y)
        k2 = rhs(y + (0.5 * h) * k1)
        k3 = rhs(y + (0.5 * h) * k2)
        k4 = rhs(y + h * k3)
        return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    for step in range(1, n_full + 1):
        rho = rk4_step(rho, dt)
        if step % store_every == 0 or (step == n_full and remainder <= 1e-9 * dt):
            yield step * dt, DensityOperator(spec.atom_dim, spec.fock_cutoff, rho)
    if remainder > 1e-9 * dt:
        rho = rk4_step(rho, remainder)
        yield t_final, DensityOperator(spec.atom_dim, spec.fock_cutoff, rho)


def evolve_density(
    rho0: DensityOperator,
    spec: LiouvillianSpec,
    t_final: float,
    dt: float | None = None,
) -> DensityOperator:
    """Evolve the master equation for t_final and return the final state."""
    rho = rho0
    for _, rho in density_trajectory(rho0, spec, t_final, dt, store_every=max(1, 10**9)):
        pass
    return rho


def _atom_density(spec: LiouvillianSpec, atom_init) -> np.ndarray:
    """Initial atomic density matrix from populations or a Bell-like state."""
    if isinstance(atom_init, BellLikeState):
        if spec.atom_mode == "joint":
            ket = np.zeros(4, dtype=complex)
            if atom_init.family == "psi":
                ket[0] = atom_init.c0   # |g1 g2>
                ket[3] = atom_init.c1   # |e1 e2>
            else:
                ket[2] = atom_init.c0   # |e1 g2>
                ket[1] = atom_init.c1   # |g1 e2>
            return np.outer(ket, ket.conj())
        # Reduced state of atom 1: diagonal populations set by <sz>.
        p_e = (1.0 + sigma_z_of_state(atom_init)) / 2.0
        return np.diag([1.0 - p_e, p_e]).astype(complex)

    if isinstance(atom_init, (int, float)):
        if spec.atom_mode != "single":
            raise ValueError("scalar excited-state population requires atom_mode='single'")
        p_e = float(atom_init)
        pops = [1.0 - p_e, p_e]
    else:
        pops = [float(x) for x in atom_init]
        if len(pops) != spec.atom_dim:
            raise ValueError(
                f"expected {spec.atom_dim} populations, got {len(pops)}"
            )
    if min(pops) < -1e-12 or abs(sum(pops) - 1.0) > 1e-9:
        raise ValueError(f"populations must be non-negative and sum to 1, got {pops}")
    return np.diag(pops).astype(complex)


def steady_state_density(
    spec: LiouvillianSpec,
    atom_init,
    tol: float = 1e-10,
    dt: float | None = None,
    t_max: float | None = None,
) -> DensityOperator:
    """Evolve atom_init (x) vacuum until the generator residual is below tol.

    atom_init may be a scalar excited-state population, a sequence of
    diagonal atomic populations, or a BellLikeState.  Because the
    atomic-inversion sectors are decoupled while the atom decay is off,
    the limit depends on atom_init through the conserved sector
    populations; that degeneracy is physical, not a solver artifact.

    The steady state of this linear flow is an exact fixed point of the
    RK4 map, so the step size only affects how fast the transient dies,
    not the converged answer; the default step is therefore coarser than
    for trajectory work.
    """
    p = validate_params(spec.params)
    rho_atom = _atom_density(spec, atom_init)
    n_levels = spec.fock_cutoff + 1
    vac = np.zeros((n_levels, n_levels), dtype=complex)
    vac[0, 0] = 1.0
    rho = np.kron(rho_atom, vac)

    if dt is None:
        dt = 0.08 / max(p.kappa1, abs(p.delta_r) + abs(p.chi), 1.0)
    check_time_step(p, dt)
    if t_max is None:
        t_max = 50.0 / p.kappa1

    rhs = _make_rhs(spec)
    t = 0.0
    while t <= t_max:
        k1 = rhs(rho)
        if float(np.abs(k1).max()) < tol:
            return DensityOperator(spec.atom_dim, spec.fock_cutoff, rho)
        k2 = rhs(rho + (0.5 * dt) * k1)
        k3 = rhs(rho + (0.5 * dt) * k2)
        k4 = rhs(rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += dt
    raise SteadyStateNotReached(
        f"steady state not reached within t_max={t_max} (tol={tol})"
    )


def _full_op(rho: DensityOperator, cav_op: np.ndarray, with_sz: bool) -> np.ndarray:
    atom = _atom1_op(SIGMA_Z, rho.atom_dim) if with_sz else np.eye(rho.atom_dim, dtype=complex)
    return np.kron(atom, cav_op)


def _expect(op: np.ndarray, rho: np.ndarray) -> complex:
    return complex(np.einsum("ij,ji->", op, rho))


def g2_from_density(rho: DensityOperator) -> float:
    """Zero-delay pair correlation Tr(a+2 a2 rho) / Tr(a+ a rho)**2."""
    cav = _cavity_ops(rho.fock_cutoff)
    n = _expect(_full_op(rho, cav["n"], False), rho.entries).real
    if n <= 0:
        raise ValueError("g2 undefined: empty cavity (<a+ a> = 0)")
    pair = _expect(_full_op(rho, cav["ad2_a2"], False), rho.entries).real
    return pair / (n * n)


def mean_photon_from_density(rho: DensityOperator) -> float:
    cav = _cavity_ops(rho.fock_cutoff)
    return _expect(_full_op(rho, cav["n"], False), rho.entries).real


def moments_from_density(rho: DensityOperator) -> MomentVector:
    """Extract all sixteen tracked expectation values from a density matrix."""
    cav = _cavity_ops(rho.fock_cutoff)
    mat = rho.entries
    return MomentVector(
        ad_a=_expect(_full_op(rho, cav["n"], False), mat),
        a=_expect(_full_op(rho, cav["a"], False), mat),
        ad=_expect(_full_op(rho, cav["ad"], False), mat),
        sz_a=_expect(_full_op(rho, cav["a"], True), mat),
        sz_ad=_expect(_full_op(rho, cav["ad"], True), mat),
        sz=_expect(_full_op(rho, cav["eye"], True), mat),
        ad2_a2=_expect(_full_op(rho, cav["ad2_a2"], False), mat),
        ad2_a=_expect(_full_op(rho, cav["ad2_a"], False), mat),
        ad_a2=_expect(_full_op(rho, cav["ad_a2"], False), mat),
        ad2_a_sz=_expect(_full_op(rho, cav["ad2_a"], True), mat),
        ad_a_sz=_expect(_full_op(rho, cav["n"], True), mat),
        ad2_sz=_expect(_full_op(rho, cav["ad2"], True), mat),
        ad_a2_sz=_expect(_full_op(rho, cav["ad_a2"], True), mat),
        a2_sz=_expect(_full_op(rho, cav["a2"], True), mat),
        ad2=_expect(_full_op(rho, cav["ad2"], False), mat),
        a2=_expect(_full_op(rho, cav["a2"], False), mat),
    )


def sector_amplitude(p: Params, sector: int) -> complex:
    """Steady coherent amplitude of the cavity within one atomic sector.

    -i epsilon / (i (delta_r + sector*chi) + kappa1/2); its squared
    modulus is the sector intensity used by the mixture evaluation.
    """
    validate_params(p)
    if sector not in (+1, -1):
        raise ValueError(f"sector must be +1 or -1, got {sector}")
    return -1j * p.epsilon / (1j * (p.delta_r + sector * p.chi) + p.kappa1 / 2.0)


def joint_bell_state_g2(
    s: BellLikeState,
    p: Params,
    fock_cutoff: int = 12,
    tol: float = 1e-10,
) -> float:
    """Steady-state g2 with the full two-atom state as the initial condition.

    Atom 2 never couples to the driven cavity, so the result must agree
    with the single-atom solver at sz = sigma_z_of_state(s): measuring
    the cavity quantifies the pair's entanglement no matter where the
    second atom sits.  Both atomic decays are off here.
    """
    spec = LiouvillianSpec(
        params=p,
        fock_cutoff=fock_cutoff,
        atom_mode="joint",
        include_atom_decay=False,
    )
    rho = steady_state_density(spec, s, tol=tol)
    return g2_from_density(rho)
