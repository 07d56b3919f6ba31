"""Shared domain types and validation for the dispersive-cavity g2 solvers.

Unit convention used everywhere in this package: frequencies and decay
rates are angular MHz (hbar = 1) and times are microseconds, so products
like gamma1 * t are dimensionless without conversion factors.

All types here are immutable value objects and safe to share between
threads or processes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np

# Library-wide default tolerances. Callers may override per call.
NORMALIZATION_ATOL = 1e-12
TRACE_ATOL = 1e-9
HERMITICITY_ATOL = 1e-9
POSITIVITY_FLOOR = -1e-8
CONJUGATE_PAIR_ATOL = 1e-9


class SolverError(RuntimeError):
    """A numerical routine could not produce a trustworthy result."""


@dataclass(frozen=True)
class Params:
    """Physical parameters of the driven cavity with a dispersively coupled atom.

    Attributes
    ----------
    chi : float
        Dispersive coupling strength (MHz). The atom shifts the cavity
        frequency by +chi or -chi depending on its energy state.
    kappa1 : float
        Cavity energy decay rate (MHz). Must be positive for a steady
        state to exist.
    gamma1 : float
        Atomic decay rate (MHz). Zero during the photon-statistics
        measurement window; nonzero only for decay bookkeeping.
    epsilon : float
        Coherent drive amplitude (MHz).
    delta_r : float
        Drive-cavity detuning, cavity frequency minus drive frequency (MHz).
    """

    chi: float
    kappa1: float
    gamma1: float
    epsilon: float
    delta_r: float


def validate_params(p: Params) -> Params:
    """Check the physical-parameter invariants and return ``p`` unchanged.

    Raises
    ------
    ValueError
        If any field is non-finite, ``kappa1 <= 0``, ``epsilon < 0``,
        or ``gamma1 < 0``.
    """
    for f in fields(p):
        v = getattr(p, f.name)
        if not math.isfinite(v):
            raise ValueError(f"{f.name} must be finite, got {v!r}")
    if p.kappa1 <= 0:
        raise ValueError("kappa1 must be positive")
    if p.epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    if p.gamma1 < 0:
        raise ValueError("gamma1 must be non-negative")
    return p


@dataclass(frozen=True)
class RawFrequencies:
    """Bare frequencies of the atom-cavity-drive system (MHz).

    Only used to derive the effective (chi, delta_r) pair; the solvers
    never see these directly.  ``Delta`` is the atom-cavity detuning and
    must equal ``omega_a1 - omega_c1``.
    """

    omega_a1: float
    omega_c1: float
    omega_d: float
    g: float
    Delta: float

    def __post_init__(self) -> None:
        expected = self.omega_a1 - self.omega_c1
        if not math.isclose(self.Delta, expected, rel_tol=1e-9, abs_tol=1e-9):
            raise ValueError(
                f"Delta={self.Delta} inconsistent with omega_a1 - omega_c1 = {expected}"
            )
        if self.Delta == 0:
            raise ValueError("Delta must be nonzero (dispersive limit undefined)")


@dataclass(frozen=True)
class BellLikeState:
    """Pure two-atom state of one of the two Bell-like families.

    family 'psi':  c0|g1 g2> + c1|e1 e2>
    family 'phi':  c0|e1 g2> + c1|g1 e2>

    Amplitudes are complex and must be normalized to within 1e-12;
    phases are kept because the joint master-equation simulation takes
    the full state, even though the concurrence depends only on moduli.
    """

    family: str
    c0: complex
    c1: complex

    def __post_init__(self) -> None:
        fam = self.family.lower()
        if fam not in ("psi", "phi"):
            raise ValueError(f"family must be 'psi' or 'phi', got {self.family!r}")
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "c0", complex(self.c0))
        object.__setattr__(self, "c1", complex(self.c1))
        norm = abs(self.c0) ** 2 + abs(self.c1) ** 2
        if abs(norm - 1.0) > NORMALIZATION_ATOL:
            raise ValueError(f"state not normalized: |c0|^2+|c1|^2 = {norm}")

    @classmethod
    def psi(cls, c0: complex, c1: complex) -> "BellLikeState":
        return cls("psi", c0, c1)

    @classmethod
    def phi(cls, c0: complex, c1: complex) -> "BellLikeState":
        return cls("phi", c0, c1)

    @classmethod
    def normalized(cls, family: str, c0: complex, c1: complex) -> "BellLikeState":
        """Build a state from unnormalized amplitudes by rescaling them."""
        norm = math.sqrt(abs(c0) ** 2 + abs(c1) ** 2)
        if norm == 0:
            raise ValueError("both amplitudes are zero")
        return cls(family, c0 / norm, c1 / norm)


# Canonical ordering of the sixteen cavity/atom operator expectation values.
# This ordering is fixed so that array round-trips and test fixtures stay
# stable; 'ad' stands for the creation operator a-dagger.
MOMENT_LABELS = (
    "ad_a",       # <a+ a>
    "a",          # <a>
    "ad",         # <a+>
    "sz_a",       # <sz a>
    "sz_ad",      # <sz a+>
    "sz",         # <sz>
    "ad2_a2",     # <a+2 a2>
    "ad2_a",      # <a+2 a>
    "ad_a2",      # <a+ a2>
    "ad2_a_sz",   # <a+2 a sz>
    "ad_a_sz",    # <a+ a sz>
    "ad2_sz",     # <a+2 sz>
    "ad_a2_sz",   # <a+ a2 sz>
    "a2_sz",      # <a2 sz>
    "ad2",        # <a+2>
    "a2",         # <a2>
)


@dataclass(frozen=True)
class MomentVector:
    """The closed set of sixteen operator expectation values.

    Field order follows :data:`MOMENT_LABELS`.  Conjugate entries are
    stored explicitly (both <a> and <a+>, etc.) because the equations of
    motion are integrated for all of them; the pairings are an invariant
    checked by :func:`validate_moments`, not an assumption.
    """

    ad_a: complex = 0j
    a: complex = 0j
    ad: complex = 0j
    sz_a: complex = 0j
    sz_ad: complex = 0j
    sz: complex = 0j
    ad2_a2: complex = 0j
    ad2_a: complex = 0j
    ad_a2: complex = 0j
    ad2_a_sz: complex = 0j
    ad_a_sz: complex = 0j
    ad2_sz: complex = 0j
    ad_a2_sz: complex = 0j
    a2_sz: complex = 0j
    ad2: complex = 0j
    a2: complex = 0j

    @classmethod
    def vacuum(cls, sz: float = 0.0) -> "MomentVector":
        """All cavity moments zero; the conserved atomic inversion set to sz."""
        return cls(sz=complex(sz))

    @classmethod
    def from_array(cls, x) -> "MomentVector":
        if len(x) != 16:
            raise ValueError(f"expected 16 entries, got {len(x)}")
        return cls(**{name: complex(v) for name, v in zip(MOMENT_LABELS, x)})

    def to_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in MOMENT_LABELS], dtype=complex)


# (entry, conjugate entry) pairs that must match under complex conjugation.
CONJUGATE_PAIRS = (
    ("ad", "a"),
    ("sz_ad", "sz_a"),
    ("ad2_a", "ad_a2"),
    ("ad2", "a2"),
    ("ad2_sz", "a2_sz"),
    ("ad2_a_sz", "ad_a2_sz"),
)


def validate_moments(m: MomentVector, atol: float = CONJUGATE_PAIR_ATOL) -> MomentVector:
    """Check conjugation pairings, realness and sign constraints.

    The tolerance is absolute but scaled up for moments of magnitude
    above one, so strongly driven systems are not rejected for pure
    floating-point reasons.
    """
    for left, right in CONJUGATE_PAIRS:
        lv = getattr(m, left)
        rv = getattr(m, right)
        scale = max(1.0, abs(lv))
        if abs(lv - rv.conjugate()) > atol * scale:
            raise ValueError(f"<{left}> is not the conjugate of <{right}>: {lv} vs {rv}")
    for name in ("ad_a", "ad2_a2"):
        v = getattr(m, name)
        scale = max(1.0, abs(v))
        if abs(v.imag) > atol * scale:
            raise ValueError(f"<{name}> must be real, got {v}")
        if v.real < -atol * scale:
            raise ValueError(f"<{name}> must be non-negative, got {v}")
    if abs(m.sz.imag) > atol:
        raise ValueError(f"<sz> must be real, got {m.sz}")
    if abs(m.sz.real) > 1 + atol:
        raise ValueError(f"<sz> must lie in [-1, 1], got {m.sz}")
    scale = max(1.0, abs(m.ad_a_sz))
    if abs(m.ad_a_sz.imag) > atol * scale:
        raise ValueError(f"<ad_a_sz> must be real, got {m.ad_a_sz}")
    return m


@dataclass(frozen=True)
class DensityOperator:
    """Truncated-space joint density matrix: atom(s) tensor cavity.

    atom_dim is 2 (one atom) or 4 (two atoms); the cavity keeps Fock
    levels 0..fock_cutoff.  The matrix is stored read-only.
    """

    atom_dim: int
    fock_cutoff: int
    entries: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.atom_dim not in (2, 4):
            raise ValueError(f"atom_dim must be 2 or 4, got {self.atom_dim}")
        if self.fock_cutoff < 1:
            raise ValueError(f"fock_cutoff must be at least 1, got {self.fock_cutoff}")
        mat = np.array(self.entries, dtype=complex)
        d = self.dim
        if mat.shape != (d, d):
            raise ValueError(f"entries must have shape {(d, d)}, got {mat.shape}")
        mat.setflags(write=False)
        object.__setattr__(self, "entries", mat)

    @property
    def dim(self) -> int:
        return self.atom_dim * (self.fock_cutoff + 1)

    def expectation(self, op: np.ndarray) -> complex:
        return complex(np.trace(op @ self.entries))


def validate_density(
    rho: DensityOperator,
    trace_atol: float = TRACE_ATOL,
    herm_atol: float = HERMITICITY_ATOL,
    eig_floor: float = POSITIVITY_FLOOR,
) -> DensityOperator:
    """Check unit trace, Hermiticity and spectral positivity of ``rho``."""
    mat = rho.entries
    tr = np.trace(mat)
    if abs(tr - 1.0) > trace_atol:
        raise ValueError(f"trace must be 1, got {tr}")
    herm_dev = np.max(np.abs(mat - mat.conj().T))
    if herm_dev > herm_atol:
        raise ValueError(f"matrix not Hermitian: max deviation {herm_dev:.3e}")
    eigmin = float(np.linalg.eigvalsh((mat + mat.conj().T) / 2).min())
    if eigmin < eig_floor:
        raise ValueError(f"negative eigenvalue {eigmin:.3e} below floor {eig_floor:.1e}")
    return rho


@dataclass(frozen=True)
class G2Point:
    """One point of a g2-versus-detuning curve."""

    delta_r: float
    g2: float
    nbar: float
    method: str

    def __post_init__(self) -> None:
        if self.method not in ("analytic", "mixture", "moments", "lindblad"):
            raise ValueError(f"unknown method tag {self.method!r}")
        if not math.isfinite(self.g2) or self.g2 <= 0:
            raise ValueError(f"g2 must be finite and positive, got {self.g2}")
        if self.nbar < 0:
            raise ValueError(f"nbar must be non-negative, got {self.nbar}")


@dataclass(frozen=True)
class ConcurrenceReport:
    """Entanglement estimate from the g2 values at the two dispersive peaks."""

    g2_plus: float
    g2_minus: float
    c_raw: float
    c_clamped: float
    c_wootters: float
    rel_error: float

    def __post_init__(self) -> None:
        for f in fields(self):
            if not math.isfinite(getattr(self, f.name)):
                raise ValueError(f"{f.name} must be finite")
        expected = min(max(self.c_raw, 0.0), 1.0)
        if self.c_clamped != expected:
            raise ValueError(
                f"c_clamped={self.c_clamped} is not clamp(c_raw={self.c_raw})"
            )
