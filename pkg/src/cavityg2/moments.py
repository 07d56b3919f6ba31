"""Closed sixteen-moment equations of motion: RHS, steady state, trajectories.

The dispersive interaction couples cavity moments only to the same
moments multiplied by sz, so the sixteen expectation values in
:data:`cavityg2.core.MOMENT_LABELS` evolve autonomously (the hierarchy
closes without truncation).  sz itself is conserved while the atomic
decay is off, which makes it an input parameter of the steady-state
solve rather than an unknown: its row of the 16x16 system is
identically zero, and fixing it leaves a regular 15x15 complex linear
problem.

Variable ordering is fixed by MOMENT_LABELS (sz is entry 5); the
steady-state solve uses that ordering with sz removed.
"""
from __future__ import annotations

import math

import numpy as np

from .core import (
    MOMENT_LABELS,
    MomentVector,
    Params,
    SolverError,
    validate_moments,
    validate_params,
)

SZ_INDEX = MOMENT_LABELS.index("sz")
STEADY_UNKNOWNS = tuple(lbl for lbl in MOMENT_LABELS if lbl != "sz")
_UNKNOWN_INDICES = tuple(i for i in range(16) if i != SZ_INDEX)


def _rhs16(x: list[complex], p: Params) -> list[complex]:
    """Time derivatives of the sixteen moments (plain complex arithmetic)."""
    (ad_a, a, ad, sz_a, sz_ad, sz, ad2_a2, ad2_a, ad_a2, ad2_a_sz,
     ad_a_sz, ad2_sz, ad_a2_sz, a2_sz, ad2, a2) = x
    e = p.epsilon
    c = p.chi
    dr = p.delta_r
    k = p.kappa1
    return [
        -1j * e * (ad - a) - k * ad_a,
        -1j * dr * a - 1j * c * sz_a - 1j * e - 0.5 * k * a,
        1j * dr * ad + 1j * c * sz_ad + 1j * e - 0.5 * k * ad,
        -1j * dr * sz_a - 1j * e * sz - 1j * c * a - 0.5 * k * sz_a,
        1j * dr * sz_ad + 1j * e * sz + 1j * c * ad - 0.5 * k * sz_ad,
        0j,
        2j * e * ad_a2 - 2j * e * ad2_a - 2.0 * k * ad2_a2,
        1j * c * ad2_a_sz + 1j * dr * ad2_a + 2j * e * ad_a - 1j * e * ad2 - 1.5 * k * ad2_a,
        -1j * c * ad_a2_sz - 1j * dr * ad_a2 - 2j * e * ad_a + 1j * e * a2 - 1.5 * k * ad_a2,
        1j * c * ad2_a + 1j * dr * ad2_a_sz + 2j * e * ad_a_sz - 1j * e * ad2_sz - 1.5 * k * ad2_a_sz,
        -1j * e * (sz_ad - sz_a) - k * ad_a_sz,
        2j * dr * ad2_sz + 2j * c * ad2 + 2j * e * sz_ad - k * ad2_sz,
        -1j * c * ad_a2 - 1j * dr * ad_a2_sz - 2j * e * ad_a_sz + 1j * e * a2_sz - 1.5 * k * ad_a2_sz,
        -2j * dr * a2_sz - 2j * c * a2 - 2j * e * sz_a - k * a2_sz,
        2j * dr * ad2 + 2j * c * ad2_sz + 2j * e * ad - k * ad2,
        -2j * dr * a2 - 2j * c * a2_sz - 2j * e * a - k * a2,
    ]


def moment_rhs(m: MomentVector, p: Params) -> MomentVector:
    """Time derivative of every moment, including d<sz>/dt = 0."""
    validate_params(p)
    x = [getattr(m, lbl) for lbl in MOMENT_LABELS]
    return MomentVector.from_array(_rhs16(x, p))


def steady_state_moments(p: Params, sz: float) -> MomentVector:
    """Solve the moment equations for their unique steady state.

    sz is conserved, so it enters as a parameter; the remaining fifteen
    moments solve a dense complex linear system (LU with partial
    pivoting).  The returned vector has zero time derivative and
    satisfies the conjugate-pairing invariants.
    """
    validate_params(p)
    if not math.isfinite(sz) or abs(sz) > 1:
        raise ValueError(f"sz must lie in [-1, 1], got {sz}")

    base = [0j] * 16
    base[SZ_INDEX] = complex(sz)
    b0 = _rhs16(base, p)
    b = np.array([b0[i] for i in _UNKNOWN_INDICES], dtype=complex)

    mat = np.empty((15, 15), dtype=complex)
    for col, j in enumerate(_UNKNOWN_INDICES):
        probe = list(base)
        probe[j] = probe[j] + 1.0
        r = _rhs16(probe, p)
        for row, i in enumerate(_UNKNOWN_INDICES):
            mat[row, col] = r[i] - b0[i]

    try:
        x = np.linalg.solve(mat, -b)
    except np.linalg.LinAlgError as exc:
        raise SolverError("no unique steady state (singular moment system)") from exc

    full = [0j] * 16
    full[SZ_INDEX] = complex(sz)
    for val, j in zip(x, _UNKNOWN_INDICES):
        full[j] = complex(val)

    residual = max(abs(v) for v in _rhs16(full, p))
    scale = max(1.0, max(abs(v) for v in full)) * max(
        1.0, p.kappa1 + abs(p.chi) + abs(p.delta_r) + p.epsilon
    )
    if residual > 1e-8 * scale:
        raise SolverError(f"steady-state residual too large: {residual:.3e}")

    return validate_moments(MomentVector.from_array(full))


def default_time_step(p: Params) -> float:
    """Conservative RK4 step for the moment (and density) dynamics."""
    return 0.01 / max(p.kappa1, abs(p.delta_r) + abs(p.chi), 1.0)


def check_time_step(p: Params, dt: float) -> float:
    """Reject steps too coarse for the fastest rotating moment."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if dt * (abs(p.delta_r) + abs(p.chi) + p.kappa1) >= 0.1:
        raise ValueError(
            f"dt={dt} too large: dt*(|delta_r|+|chi|+kappa1) must stay below 0.1"
        )
    return dt


def evolve_moments(
    m0: MomentVector,
    p: Params,
    t_final: float,
    dt: float | None = None,
    store_every: int = 1,
) -> list[tuple[float, MomentVector]]:
    """Fixed-step RK4 trajectory of the moment system.

    Returns samples (t, moments) including t = 0 and the final time.
    store_every thins the output without changing the integration step.
    """
    validate_params(p)
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    if dt is None:
        dt = default_time_step(p)
    check_time_step(p, dt)
    if store_every < 1:
        raise ValueError("store_every must be at least 1")

    x = [complex(getattr(m0, lbl)) for lbl in MOMENT_LABELS]
    out = [(0.0, m0)]
    n_full = int(math.floor(t_final / dt + 1e-9))
    remainder = t_final - n_full * dt

    def rk4_step(state: list[complex], h: float) -> list[complex]:
        k1 = _rhs16(state, p)
        k2 = _rhs16([s + 0.5 * h * v for s, v in zip(state, k1)], p)
        k3 = _rhs16([s + 0.5 * h * v for s, v in zip(state, k2)], p)
        k4 = _rhs16([s + h * v for s, v in zip(state, k3)], p)
        return [
            s + (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
            for s, a1, a2, a3, a4 in zip(state, k1, k2, k3, k4)
        ]

    for step in range(1, n_full + 1):
        x = rk4_step(x, dt)
        if step % store_every == 0 or (step == n_full and remainder <= 1e-9 * dt):
            out.append((step * dt, MomentVector.from_array(x)))
    if remainder > 1e-9 * dt:
        x = rk4_step(x, remainder)
        out.append((t_final, MomentVector.from_array(x)))
    return out


def g2_from_moments(m: MomentVector) -> float:
    """Normalized pair correlation <a+2 a2> / <a+ a>**2 at zero delay."""
    n = m.ad_a.real
    if n <= 0:
        raise ValueError("g2 undefined: empty cavity (<a+ a> = 0)")
    return m.ad2_a2.real / (n * n)
