"""One-dimensional quantum ring with Rashba coupling screened by an in-plane
field: angular Hamiltonians, interference phases, filter conditions and the
two-lead scattering matrix.

Arm wavefunctions are ``exp(i (d k_phi + s phi_T) phi) R(phi) chi_s`` with
``R(phi) = exp(-i beta sigma_phi(phi) / 2)``.  They are plane waves dressed by
a unitary frame ``G(phi) = R(phi) exp(i phi_T sigma_z phi)``, so the covariant
derivative ``(d/dphi - i A)`` with ``A = -i G' G^-1`` multiplies each of them by
``i d k_phi``.  Junctions use spinor continuity plus the vanishing sum of
outward covariant derivatives, which conserves current and makes S unitary.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PhysicsInvariantError
from .spin import IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z, Spinor2, rotation_about

MIN_MODES = 8
# condition number above which the junction system is reported as near-singular
COND_WARN = 1e12


class NearSingularJunctionWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class RingParams:
    rho: float
    theta: float
    b_pl: float = 0.0
    m_eff: float = 1.0
    charge: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("rho", "theta", "b_pl", "m_eff", "charge", "hbar"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"RingParams.{name} must be finite")
        if self.rho <= 0:
            raise DomainError(f"RingParams invariant violated: rho must be > 0, got {self.rho}")
        if self.m_eff <= 0:
            raise DomainError(f"RingParams invariant violated: m_eff must be > 0, got {self.m_eff}")
        if self.hbar <= 0:
            raise DomainError("RingParams invariant violated: hbar must be > 0")

    @property
    def energy_scale(self) -> float:
        """``hbar^2 / (2 m rho^2)``, the prefactor of the ring Hamiltonians."""
        return self.hbar**2 / (2 * self.m_eff * self.rho**2)

    def replace(self, **kw) -> "RingParams":
        d = dict(rho=self.rho, theta=self.theta, b_pl=self.b_pl, m_eff=self.m_eff,
                 charge=self.charge, hbar=self.hbar)
        d.update(kw)
        return RingParams(**d)


@dataclass(frozen=True)
class DerivedRing:
    xi: float
    beta: float
    phi_t: float
    rho: float

    @classmethod
    def from_xi(cls, xi: float, rho: float) -> "DerivedRing":
        return cls(xi, math.atan(xi), math.sqrt(1.0 + (xi * rho) ** 2) - 1.0, rho)


def derive(params: RingParams) -> DerivedRing:
    """Screened coupling ``xi = theta - 4 e B_pl``, ``beta = arctan xi`` and the
    total phase ``phi_T = sqrt(1 + xi^2 rho^2) - 1``."""
    xi = params.theta - 4 * params.charge * params.b_pl
    return DerivedRing.from_xi(xi, params.rho)


def dphi_t_dxi(xi: float, rho: float) -> float:
    return xi * rho**2 / math.sqrt(1 + (xi * rho) ** 2)


@dataclass(frozen=True)
class RingState:
    momentum_sign: int
    spin_sign: int
    k_phi: float
    energy: float


def ring_state(params: RingParams, energy: float, momentum_sign: int, spin_sign: int) -> RingState:
    if energy <= 0:
        raise DomainError("energy must be > 0")
    k_phi = math.sqrt(2 * params.m_eff * energy) / params.hbar * params.rho
    return RingState(momentum_sign, spin_sign, k_phi, energy)


def state_energy(params: RingParams, k_phi: float) -> float:
    return params.hbar**2 * k_phi**2 / (2 * params.m_eff * params.rho**2)


# --- angular-momentum Hamiltonians ---------------------------------------


@dataclass(frozen=True)
class AngularOperator:
    """Operator on the truncated basis ``|m, s>`` (``exp(i m phi) chi_s``)."""

    matrix: np.ndarray
    m_values: np.ndarray
    spins: np.ndarray
    prefactor: float
    flux_shift: float

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))


def _angular_operator(prefactor: float, a: float, shift: float, n_modes: int) -> AngularOperator:
    # c[(p - a sigma_rho)^2] with p = -i d/dphi - shift; sigma_rho maps |m,up> to
    # |m+1,down>, so the pairs (|m,up>, |m+1,down>) form closed 2x2 blocks.
    # Up-spin m runs over [-M, M-1] and down-spin over [-M+1, M] so that no
    # block is cut by the truncation.
    if n_modes < MIN_MODES:
        raise DomainError(f"truncation needs at least {MIN_MODES} angular modes, got {n_modes}")
    if n_modes % 2:
        raise DomainError("n_modes must be even")
    half = n_modes // 2
    m_up = np.arange(-half, half)
    m_dn = m_up + 1
    dim = 2 * n_modes
    H = np.zeros((dim, dim), dtype=complex)
    for i, m in enumerate(m_up):
        iu, idn = 2 * i, 2 * i + 1
        p_up = m - shift
        p_dn = m + 1 - shift
        H[iu, iu] = p_up**2 + a**2
        H[idn, idn] = p_dn**2 + a**2
        H[iu, idn] = H[idn, iu] = -a * (p_up + p_dn)
    m_values = np.empty(dim, dtype=int)
    m_values[0::2] = m_up
    m_values[1::2] = m_dn
    spins = np.tile([1, -1], n_modes)
    return AngularOperator(prefactor * H, m_values, spins, prefactor, shift)


def hamiltonian_inplane(params: RingParams, n_modes: int = 64) -> AngularOperator:
    """``c [-i d/dphi - sigma_rho xi rho / 2]^2`` with ``c = hbar^2 / 2 m rho^2``."""
    d = derive(params)
    return _angular_operator(params.energy_scale, d.xi * params.rho / 2, 0.0, n_modes)


def perpendicular_flux(params: RingParams, b_z: float) -> float:
    """``phi_B = e pi rho^2 B_z / h`` with ``h = 2 pi hbar``."""
    return params.charge * math.pi * params.rho**2 * b_z / (2 * math.pi * params.hbar)


def hamiltonian_perpendicular(params: RingParams, b_z: float, n_modes: int = 64) -> AngularOperator:
    """``c [-i d/dphi - phi_B - sigma_rho theta rho / 2]^2``; ``B_pl`` plays no role."""
    return _angular_operator(
        params.energy_scale, params.theta * params.rho / 2, perpendicular_flux(params, b_z), n_modes
    )


def sigma_rho_coefficient(op: AngularOperator) -> float:
    """Recover the coefficient ``a`` of ``sigma_rho`` from the assembled matrix.

    Off-diagonal block entries are ``-c a (p_up + p_dn)``; ``a`` is their least
    squares fit over all blocks.
    """
    H = op.matrix / op.prefactor
    offs = np.array([H[2 * i, 2 * i + 1].real for i in range(H.shape[0] // 2)])
    m_up = op.m_values[0::2]
    w = (m_up - op.flux_shift) + (m_up + 1 - op.flux_shift)
    return float(-np.dot(offs, w) / np.dot(w, w))


def analytic_spectrum(params: RingParams, n_modes: int = 64, b_z: float | None = None) -> np.ndarray:
    """Closed-form levels of the truncated ring Hamiltonian, sorted.

    Each block with ``mu = m + 1/2 - shift`` has levels
    ``c (|mu| +- sqrt(1 + 4 a^2) / 2)^2``.  For the in-plane case
    (``b_z=None``) ``sqrt(1 + 4 a^2) = 1 + phi_T`` and, at zero shift, the
    levels are ``c (j +- phi_T / 2)^2`` with integer ``j``: the spin branches are
    displaced by half the total phase.
    """
    if b_z is None:
        a, shift = derive(params).xi * params.rho / 2, 0.0
    else:
        a, shift = params.theta * params.rho / 2, perpendicular_flux(params, b_z)
    half = n_modes // 2
    mu = np.abs(np.arange(-half, half) + 0.5 - shift)
    root = math.sqrt(1 + 4 * a * a) / 2
    levels = np.concatenate([(mu - root) ** 2, (mu + root) ** 2])
    return params.energy_scale * np.sort(levels)


def screening_sweep(params: RingParams, b_pl_values) -> np.ndarray:
    """``xi`` along a sweep of the in-plane field."""
    return np.array([derive(params.replace(b_pl=float(b))).xi for b in b_pl_values])


# --- phases and filter conditions ----------------------------------------


def u_phase(d: DerivedRing, branch: int = 1) -> np.ndarray:
    """``exp(+-2 pi i phi_T) exp(-i beta sigma_y / 2)``; ``branch`` picks the sign."""
    if branch not in (1, -1):
        raise DomainError("branch must be +1 or -1")
    return np.exp(2j * math.pi * branch * d.phi_t) * rotation_about(SIGMA_Y, d.beta)


def u_phase_eigenvectors(d: DerivedRing, normalize: bool = True) -> tuple[Spinor2, Spinor2]:
    """The filter spinors ``((sqrt(xi^2+1)+1)/2, xi/2)`` and ``(xi/2, -(sqrt(xi^2+1)+1)/2)``.

    Their component ratio is ``tan(beta / 2)``.  They reduce to ``(1, 0)`` and
    ``(0, -1)`` at ``xi = 0``.  Note they are real rotations of the
    ``sigma_z`` basis by ``beta``, i.e. eigenvectors of
    ``cos(beta) sigma_z + sin(beta) sigma_x``.
    """
    big = (math.sqrt(d.xi**2 + 1) + 1) / 2
    plus = Spinor2(big, d.xi / 2)
    minus = Spinor2(d.xi / 2, -big)
    if normalize:
        return plus.normalized(), minus.normalized()
    return plus, minus


@dataclass(frozen=True)
class CaseARoot:
    n: int
    xi_rho: float
    phi_t: float
    approx_xi_rho: float
    approx_phi_t: float

    @property
    def approx_deviation(self) -> float:
        return self.approx_phi_t - (self.n + 0.5)


def filter_case_a_roots(rho: float, n_max: int) -> list[CaseARoot]:
    """Exact destructive-interference points ``phi_T = n + 1/2``.

    ``xi rho = sqrt((n + 3/2)^2 - 1)``.  The small-radius values
    ``sqrt(n + 3/2)`` are carried along for comparison only.
    """
    if rho <= 0:
        raise DomainError("rho must be > 0")
    out = []
    for n in range(n_max + 1):
        xr = math.sqrt((n + 1.5) ** 2 - 1)
        approx = math.sqrt(n + 1.5)
        out.append(CaseARoot(n, xr, math.sqrt(1 + xr**2) - 1, approx, math.sqrt(1 + approx**2) - 1))
    return out


def filter_case_b_condition(params: RingParams) -> float:
    """``|theta - 4 e B_pl|``; zero means no spin rotation phase at any energy."""
    return abs(params.theta - 4 * params.charge * params.b_pl)


# --- scattering -----------------------------------------------------------


def frame(beta: float, phi: float) -> np.ndarray:
    """``R(phi) = exp(-i beta sigma_phi(phi) / 2)``."""
    sigma_phi = math.cos(phi) * SIGMA_Y - math.sin(phi) * SIGMA_X
    return rotation_about(sigma_phi, beta)


def filter_basis(d: DerivedRing) -> tuple[np.ndarray, np.ndarray]:
    """Columns are the filter spinors on the left and right leads.

    Left lead (junction at ``phi = 0``): the normalized ``u_phase_eigenvectors``.
    Right lead (junction at ``phi = pi``): their images under ``sigma_z``, which
    equal ``R(pi) chi_s`` up to sign.
    """
    p, m = u_phase_eigenvectors(d)
    left = np.column_stack([p.as_array(), m.as_array()])
    right = SIGMA_Z @ left
    return left, right


def arm_wave(d: DerivedRing, k_phi: float, momentum_sign: int, spin_sign: int, phi: float) -> np.ndarray:
    chi = np.array([1, 0], dtype=complex) if spin_sign > 0 else np.array([0, 1], dtype=complex)
    phase = np.exp(1j * (momentum_sign * k_phi + spin_sign * d.phi_t) * phi)
    return phase * (frame(d.beta, phi) @ chi)


@dataclass(frozen=True)
class TransmissionSet:
    """Left-to-right transmissions; first label is the outgoing spin."""

    uu: float
    ud: float
    du: float
    dd: float

    def as_array(self) -> np.ndarray:
        return np.array([[self.uu, self.ud], [self.du, self.dd]])


@dataclass(frozen=True)
class SMatrix:
    """4x4 scattering matrix.

    Rows: [left-out up, left-out down, right-out up, right-out down]; columns:
    the incoming analogues.  ``entries`` is in the filter basis, ``entries_z``
    in the ``sigma_z`` basis of each lead.
    """

    entries: np.ndarray
    entries_z: np.ndarray
    energy: float
    condition: float

    def unitarity_error(self) -> float:
        S = self.entries
        return float(np.max(np.abs(S.conj().T @ S - np.eye(4))))

    def reciprocity_error(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.T)))

    def transmissions(self, basis: str = "filter") -> TransmissionSet:
        S = self.entries if basis == "filter" else self.entries_z
        t = np.abs(S[2:4, 0:2]) ** 2
        return TransmissionSet(float(t[0, 0]), float(t[0, 1]), float(t[1, 0]), float(t[1, 1]))

    def reflections(self, basis: str = "filter") -> np.ndarray:
        S = self.entries if basis == "filter" else self.entries_z
        return np.abs(S[0:2, 0:2]) ** 2

    def column_probabilities(self) -> np.ndarray:
        return np.sum(np.abs(self.entries) ** 2, axis=0)


def junction_system(params: RingParams, energy: float) -> tuple[np.ndarray, int]:
    """Assemble the 12x16 linear system of the two-junction ring.

    Unknown order: left-in (2), right-in (2), left-out (2), right-out (2),
    upper arm (4), lower arm (4); arm amplitudes are ordered
    ``(d, s) = (+,+), (+,-), (-,+), (-,-)``.  Lead spinors are in the
    ``sigma_z`` basis and both leads meet the ring at ``x = 0``.  Returns the
    matrix and the number of incoming columns (4).
    """
    if energy <= 0:
        raise DomainError("energy must be > 0")
    d = derive(params)
    k = math.sqrt(2 * params.m_eff * energy) / params.hbar
    k_phi = k * params.rho
    combos = [(1, 1), (1, -1), (-1, 1), (-1, -1)]

    def arm_block(phi):
        vals = np.column_stack([arm_wave(d, k_phi, dd, s, phi) for dd, s in combos])
        # covariant arc-length derivative of each arm wave is i d k times it
        ders = vals * (1j * k * np.array([dd for dd, _ in combos]))
        return vals, ders

    up0, dup0 = arm_block(0.0)
    upi, dupi = arm_block(math.pi)
    lo2pi, dlo2pi = arm_block(2 * math.pi)
    lopi, dlopi = arm_block(math.pi)

    I2 = IDENTITY
    Z2 = np.zeros((2, 2), dtype=complex)
    Z4 = np.zeros((2, 4), dtype=complex)
    # columns: L_in, R_in, L_out, R_out, U(4), D(4)
    rows = [
        # psi_L(0) = psi_U(0)
        np.hstack([I2, Z2, I2, Z2, -up0, Z4]),
        # psi_L(0) = psi_D(2 pi)
        np.hstack([I2, Z2, I2, Z2, Z4, -lo2pi]),
        # psi_R(0) = psi_U(pi)
        np.hstack([Z2, I2, Z2, I2, -upi, Z4]),
        # psi_R(0) = psi_D(pi)
        np.hstack([Z2, I2, Z2, I2, Z4, -lopi]),
        # outward derivatives at phi = 0: lead -d/dx, upper +D, lower -D
        np.hstack([-1j * k * I2, Z2, 1j * k * I2, Z2, dup0, -dlo2pi]),
        # outward derivatives at phi = pi: lead +d/dx, upper -D, lower +D
        np.hstack([Z2, -1j * k * I2, Z2, 1j * k * I2, -dupi, dlopi]),
    ]
    return np.vstack(rows), 4


def s_matrix(params: RingParams, energy: float) -> SMatrix:
    """Scattering matrix of the ring between two single-channel spinor leads."""
    M, n_in = junction_system(params, energy)
    a_in = M[:, :n_in]
    a_unk = M[:, n_in:]
    cond = float(np.linalg.cond(a_unk))
    if cond > COND_WARN or not math.isfinite(cond):
        warnings.warn(
            f"junction system near-singular at E={energy!r} (condition number {cond:.3g})",
            NearSingularJunctionWarning,
            stacklevel=2,
        )
        sol = np.linalg.lstsq(a_unk, -a_in, rcond=None)[0]
    else:
        sol = np.linalg.solve(a_unk, -a_in)
    # outgoing lead amplitudes per unit incoming amplitude
    S_z = sol[:4, :]
    d = derive(params)
    left, right = filter_basis(d)
    W = np.zeros((4, 4), dtype=complex)
    W[:2, :2] = left
    W[2:, 2:] = right
    S = W.conj().T @ S_z @ W
    return SMatrix(S, S_z, float(energy), cond)


def to_sigma_z_basis(s: SMatrix, d: DerivedRing) -> np.ndarray:
    """Rotate a filter-basis S-matrix back to the per-lead ``sigma_z`` basis."""
    left, right = filter_basis(d)
    W = np.zeros((4, 4), dtype=complex)
    W[:2, :2] = left
    W[2:, 2:] = right
    return W @ s.entries @ W.conj().T


def transmissions_analytic(d: DerivedRing) -> TransmissionSet:
    """``|1 + exp(+-2 pi i phi_T)|^2 / 4`` per channel (maximum 1)."""
    up = abs(1 + np.exp(2j * math.pi * d.phi_t)) ** 2 / 4
    dn = abs(1 + np.exp(-2j * math.pi * d.phi_t)) ** 2 / 4
    return TransmissionSet(float(up), float(up), float(dn), float(dn))


def check_s_matrix(s: SMatrix, tol: float = 1e-10) -> None:
    err = s.unitarity_error()
    if not err <= tol:
        raise PhysicsInvariantError(f"S-matrix unitarity violated at E={s.energy!r}: {err:.3g} > {tol:.1g}")


# --- sweeps ---------------------------------------------------------------

SWEEP_VARIABLES = {"E": "energy", "B_pl": "field", "theta": "length^-1"}


def _sweep_point(args) -> tuple:
    params, vary, value, energy = args
    if vary == "E":
        p, E = params, value
    elif vary == "B_pl":
        p, E = params.replace(b_pl=value), energy
    else:
        p, E = params.replace(theta=value), energy
    d = derive(p)
    ta = transmissions_analytic(d)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NearSingularJunctionWarning)
        s = s_matrix(p, E)
    ts = s.transmissions()
    with np.errstate(divide="ignore", invalid="ignore"):
        r_up = ts.uu / ta.uu if ta.uu > 0 else float("nan")
        r_dn = ts.dd / ta.dd if ta.dd > 0 else float("nan")
    return (value, E, d.xi, d.beta, d.phi_t, ta.uu, ta.dd, ts.uu, ts.ud, ts.du, ts.dd,
            r_up, r_dn, s.unitarity_error())


def transmission_sweep(params: RingParams, values, vary: str = "E", energy: float = 1.0, jobs: int = 1):
    """Analytic and S-matrix transmissions along a sweep of ``E``, ``B_pl`` or ``theta``.

    ``ratio_*`` columns hold the S-matrix to analytic ratio per diagonal
    channel; they are empty where the analytic value vanishes.
    """
    from .parallel import parallel_map
    from .table import ResultTable

    values = [float(v) for v in values]
    if not values:
        raise DomainError("empty sweep")
    if vary not in SWEEP_VARIABLES:
        raise DomainError(f"vary must be one of {sorted(SWEEP_VARIABLES)}, got {vary!r}")
    if vary != "E" and energy <= 0:
        raise DomainError("energy must be > 0")
    pts = parallel_map(_sweep_point, [(params, vary, v, energy) for v in values], jobs)
    cols = ["index", vary, "energy", "xi", "beta", "phi_T", "T_analytic_up", "T_analytic_down",
            "T_uu", "T_ud", "T_du", "T_dd", "ratio_up", "ratio_down", "unitarity_error"]
    units = ["1", SWEEP_VARIABLES[vary], "energy", "length^-1", "rad", "1", "1", "1",
             "1", "1", "1", "1", "1", "1", "1"]
    if vary == "E":
        cols.pop(2)
        units.pop(2)
    rows = []
    for i, pt in enumerate(pts):
        row = [i, *pt]
        if vary == "E":
            row.pop(2)
        rows.append(tuple(row))
    tags = {c: "ring-transport" for c in cols}
    tags["index"] = "plumbing"
    meta = {
        "sweep_variable": vary,
        "monotone": bool(all(b > a for a, b in zip(values, values[1:]))),
        "tags": tags,
        "basis": "filter spinors per lead",
    }
    return ResultTable(cols, units, rows, meta)
