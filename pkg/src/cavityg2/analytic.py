"""Closed-form photon statistics and the concurrence relation.

With the atom decay switched off the atomic inversion sz is conserved,
so the cavity relaxes into a two-component mixture of coherent states,
one per atomic energy sector, with effective detunings delta_r +/- chi.
Everything in this module follows from that picture: the closed-form
g2(0), its two-peak approximation, the independent mixture evaluation
used as a cross-check, and the map from the two peak values back to the
concurrence of the atom pair.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.optimize import minimize_scalar

from .core import BellLikeState, Params, RawFrequencies, SolverError, validate_params


class PeaksUnresolved(SolverError):
    """Fewer than two local maxima were found in the g2 curve.

    Carries the location/value of the single best maximum (attributes
    ``delta_r`` and ``g2``) so callers can still report something.
    """

    def __init__(self, message: str, delta_r: float, g2: float):
        super().__init__(message)
        self.delta_r = delta_r
        self.g2 = g2


def dispersive_chi(g: float, Delta: float) -> float:
    """Dispersive shift g**2 / Delta from the raw coupling and detuning.

    The sign of the result follows the sign of the atom-cavity detuning.
    """
    if Delta == 0:
        raise ValueError("dispersive limit undefined for Delta = 0")
    return g * g / Delta


def params_from_raw(
    raw: RawFrequencies, kappa1: float, gamma1: float, epsilon: float
) -> Params:
    """Reduce bare frequencies to the effective parameter bundle."""
    return Params(
        chi=dispersive_chi(raw.g, raw.Delta),
        kappa1=kappa1,
        gamma1=gamma1,
        epsilon=epsilon,
        delta_r=raw.omega_c1 - raw.omega_d,
    )


def _check_sz(sz: float) -> float:
    if not math.isfinite(sz) or abs(sz) > 1:
        raise ValueError(f"sz must lie in [-1, 1], got {sz}")
    return float(sz)


def g2_exact(p: Params, sz: float) -> float:
    """Steady-state g2(0) of the cavity field for atomic inversion ``sz``.

    Evaluates the closed-form rational function of (chi, kappa1,
    delta_r, sz).  The drive amplitude cancels from the ratio and does
    not appear.  The expression is algebraically identical to the
    grouped numerator/denominator form kept in
    :func:`g2_closed_form_raw`, but arranged as ``1 + positive/d**2`` so
    that g2 >= 1 holds exactly in floating point and sz = +/-1 returns
    exactly 1 for every detuning.
    """
    validate_params(p)
    sz = _check_sz(sz)
    hk = (p.kappa1 / 2.0) ** 2
    d = hk + p.chi**2 + p.delta_r**2 - 2.0 * sz * p.chi * p.delta_r
    # d >= hk > 0: chi^2 + delta_r^2 >= 2|chi delta_r| >= 2 sz chi delta_r.
    return 1.0 + 4.0 * p.chi**2 * p.delta_r**2 * (1.0 - sz * sz) / (d * d)


def g2_closed_form_raw(p: Params, sz: float) -> float:
    """Same rational function as :func:`g2_exact`, in its grouped form.

    Kept as an independent transcription for cross-validation against
    the mixture evaluation; near sz = +/-1 with |delta_r| close to |chi|
    the large-term cancellation makes this form noisier than g2_exact,
    which is why it is not the public evaluator.
    """
    validate_params(p)
    sz = _check_sz(sz)
    chi, dr = p.chi, p.delta_r
    hk = (p.kappa1 / 2.0) ** 2
    a_coef = 2.0 * chi**2 - 4.0 * sz * chi * dr + 2.0 * dr**2
    b_coef = -4.0 * chi * dr * (chi**2 + dr**2)
    num = hk**2 + a_coef * hk + chi**4 + b_coef * sz + 6.0 * chi**2 * dr**2 + dr**4
    den = (2.0 * sz * chi * dr - hk - chi**2 - dr**2) ** 2
    return num / den


def _sector_weights(sz: float) -> tuple[float, float]:
    """Populations of the sz = +1 and sz = -1 atomic sectors."""
    return (1.0 + sz) / 2.0, (1.0 - sz) / 2.0


def _sector_intensities(p: Params) -> tuple[float, float]:
    """Steady coherent intensities of the two sectors, in units of epsilon**2."""
    hk = (p.kappa1 / 2.0) ** 2
    return (
        1.0 / ((p.delta_r + p.chi) ** 2 + hk),
        1.0 / ((p.delta_r - p.chi) ** 2 + hk),
    )


def g2_mixture(p: Params, sz: float) -> float:
    """Independent g2(0) evaluation from the two-sector coherent mixture.

    Each atomic sector holds a driven damped cavity with detuning
    delta_r +/- chi whose steady state is a coherent state of intensity
    n_s = epsilon**2 / ((delta_r + s*chi)**2 + (kappa1/2)**2); weighting
    the sectors by (1 +/- sz)/2 gives

        g2 = sum(p_s n_s**2) / (sum(p_s n_s))**2.

    The common epsilon**2 factor cancels and is dropped from the
    arithmetic; a zero drive is still rejected because the statistics of
    an empty cavity are undefined.
    """
    validate_params(p)
    sz = _check_sz(sz)
    if p.epsilon == 0:
        raise ValueError("g2 undefined for an undriven (empty) cavity")
    p_plus, p_minus = _sector_weights(sz)
    n_plus, n_minus = _sector_intensities(p)
    mean = p_plus * n_plus + p_minus * n_minus
    if mean <= 0:
        raise ValueError("both sector populations vanish")
    return (p_plus * n_plus**2 + p_minus * n_minus**2) / (mean * mean)


def mean_photon_mixture(p: Params, sz: float) -> float:
    """Steady-state mean photon number of the two-sector mixture."""
    validate_params(p)
    sz = _check_sz(sz)
    p_plus, p_minus = _sector_weights(sz)
    n_plus, n_minus = _sector_intensities(p)
    return p.epsilon**2 * (p_plus * n_plus + p_minus * n_minus)


def g2_peak_approx(sz: float, branch: int) -> float:
    """Approximate peak height 2/(1 -+ sz) at delta_r = +chi or -chi.

    branch = +1 refers to the peak at delta_r = +chi (value 2/(1-sz)),
    branch = -1 to the peak at delta_r = -chi (value 2/(1+sz)); this
    sign convention is fixed throughout the package.  Valid in the
    strong-dispersive regime (1-sz)*chi/kappa1 >> 1.
    """
    sz = _check_sz(sz)
    if branch not in (+1, -1):
        raise ValueError(f"branch must be +1 or -1, got {branch}")
    denom = 1.0 - sz if branch == +1 else 1.0 + sz
    if denom == 0:
        raise ValueError(
            "approximation invalid at sz = %+d; use g2_exact (the exact value is 1)"
            % branch
        )
    return 2.0 / denom


def concurrence_from_g2(g2_plus: float, g2_minus: float) -> tuple[float, float]:
    """Concurrence estimate 2/sqrt(g2_plus * g2_minus) from the two peaks.

    Returns (raw, clamped).  The raw value can exceed 1 slightly because
    the peak heights 2/(1 -+ sz) are approximations; clamping to [0, 1]
    is presentation only, the raw value preserves the arithmetic.
    """
    if not (g2_plus > 0 and g2_minus > 0):
        raise ValueError("g2 values must be positive")
    c_raw = 2.0 / math.sqrt(g2_plus * g2_minus)
    return c_raw, min(max(c_raw, 0.0), 1.0)


def wootters_concurrence(s: BellLikeState) -> float:
    """Concurrence 2|c0 c1| of a Bell-like state (same for both families)."""
    return 2.0 * abs(s.c0) * abs(s.c1)


def sigma_z_of_state(s: BellLikeState) -> float:
    """Inversion <sz> of atom 1 in the reduced state of a Bell-like pair.

    For the psi family c1 multiplies |e1 e2>, so <sz> = |c1|^2 - |c0|^2;
    for phi it is c0 that multiplies |e1 g2>, giving |c0|^2 - |c1|^2.
    """
    if s.family == "psi":
        return abs(s.c1) ** 2 - abs(s.c0) ** 2
    return abs(s.c0) ** 2 - abs(s.c1) ** 2


def sigma_z_decay(sz0: float, gamma1: float, t: float) -> float:
    """Atomic inversion after decaying freely for time t (microseconds).

    Closed-form solution of d<sz>/dt = -gamma1 (<sz> + 1): the inversion
    relaxes exponentially toward -1 from the initial value sz0.
    """
    sz0 = _check_sz(sz0)
    if gamma1 < 0 or t < 0:
        raise ValueError("gamma1 and t must be non-negative")
    return math.exp(-gamma1 * t) * (sz0 + 1.0) - 1.0


def find_peaks(
    p: Params,
    sz: float,
    d_min: float | None = None,
    d_max: float | None = None,
    n_points: int = 1001,
) -> tuple[float, float]:
    """Locate the two g2 maxima over delta_r by grid scan plus refinement.

    The scan grid must span at least [-2|chi|, 2|chi|].  Each of the two
    largest interior local maxima is refined by bracketed derivative-free
    maximization to 1e-3 MHz.  Returns (location near +chi, location
    near -chi).

    Raises
    ------
    PeaksUnresolved
        If fewer than two interior local maxima exist (flat curve, e.g.
        chi = 0 or sz = +/-1); the exception carries the single best point.
    """
    validate_params(p)
    sz = _check_sz(sz)
    span = 2.0 * abs(p.chi)
    if d_min is None:
        d_min = -1.25 * span if span > 0 else -10.0
    if d_max is None:
        d_max = 1.25 * span if span > 0 else 10.0
    if d_min > -span or d_max < span:
        raise ValueError(
            f"grid [{d_min}, {d_max}] must span at least [-2|chi|, 2|chi|] = [{-span}, {span}]"
        )
    if n_points < 5:
        raise ValueError("need at least 5 grid points")

    grid = np.linspace(d_min, d_max, n_points)

    def g2_at(d: float) -> float:
        return g2_exact(
            Params(p.chi, p.kappa1, p.gamma1, p.epsilon, float(d)), sz
        )

    vals = np.array([g2_at(d) for d in grid])
    interior = np.arange(1, n_points - 1)
    is_max = (vals[interior] > vals[interior - 1]) & (vals[interior] > vals[interior + 1])
    candidates = interior[is_max]

    if len(candidates) < 2:
        i_best = int(np.argmax(vals))
        raise PeaksUnresolved(
            "peaks unresolved: fewer than two local maxima on the grid",
            delta_r=float(grid[i_best]),
            g2=float(vals[i_best]),
        )

    top_two = candidates[np.argsort(vals[candidates])[-2:]]
    refined = []
    for i in top_two:
        res = minimize_scalar(
            lambda d: -g2_at(d),
            bounds=(grid[i - 1], grid[i + 1]),
            method="bounded",
            options={"xatol": 1e-4},
        )
        refined.append(float(res.x))

    # Assign by proximity to the +chi / -chi branch.
    if abs(refined[0] - p.chi) <= abs(refined[1] - p.chi):
        return refined[0], refined[1]
    return refined[1], refined[0]
