"""In-plane field: gauge scalar, removal of the vector potential, coordinate
quantization and the quantized Hall surface current.

Coordinates are ``x_B`` (along the in-plane field) and ``x_perp`` (in-plane,
perpendicular to it).  Natural units ``e = hbar = c = 1`` are the default; the
constants live on :class:`FieldConfig` so other unit systems can be used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy.optimize import bisect
from scipy.special import lambertw

from .errors import (
    DomainError,
    GridError,
    OverflowRepresentationError,
    QuantizationError,
    SingularPointError,
)
from .spin import IDENTITY, MAJORANA_C, SIGMA_X, SIGMA_Z, ChargeConjugation, make_inplane_basis

# exp(709.78) is the largest finite double
MAX_EXPONENT = 700.0


@dataclass(frozen=True)
class FieldConfig:
    flux: float = 1.0
    l0: float = 1.0
    C: float = 0.0
    charge: float = 1.0
    omega: float = 0.0
    hbar: float = 1.0
    c_light: float = 1.0

    def __post_init__(self):
        for name in ("flux", "l0", "C", "charge", "omega", "hbar", "c_light"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"FieldConfig.{name} must be finite")
        if self.l0 <= 0:
            raise DomainError(f"FieldConfig.l0 must be > 0, got {self.l0}")

    @property
    def sigma_b(self) -> np.ndarray:
        return make_inplane_basis(self.omega)[0]

    @property
    def sigma_perp(self) -> np.ndarray:
        return make_inplane_basis(self.omega)[1]


def phi_profile(cfg: FieldConfig, x_perp):
    """Coefficient of ``sigma_B`` in the gauge scalar, as a function of ``x_perp``.

    ``-i flux (x ln|x/l0| - x + C)``; with ``C = 0`` this is
    ``-i flux x (ln|x/l0| - 1)``, which vanishes at ``x = e l0``.
    """
    x = np.asarray(x_perp, dtype=float)
    if np.any(x == 0):
        raise SingularPointError("phi_profile is singular at x_perp = 0")
    val = np.asarray(-1j * cfg.flux * (x * np.log(np.abs(x / cfg.l0)) - x + cfg.C))
    return complex(val) if val.ndim == 0 else val


def b_profile(cfg: FieldConfig, x_perp):
    """Field strength ``flux / x_perp`` generated by :func:`phi_profile`."""
    x = np.asarray(x_perp, dtype=float)
    if np.any(x <= 0):
        raise DomainError("b_profile requires x_perp > 0")
    val = np.asarray(cfg.flux / x)
    return float(val) if val.ndim == 0 else val


def b_from_phi_fd(cfg: FieldConfig, x_perp: float, h: float, stable: bool = True) -> complex:
    """``i d^2 phi / dx_perp^2`` by the three-point central difference.

    With ``stable=False`` the stencil is applied to sampled ``phi_profile``
    values, whose rounding error grows like ``eps / h^2``.  The default
    evaluates the same stencil after cancelling the terms linear in ``x``
    exactly: ``(x+h) ln(x+h) + (x-h) ln(x-h) - 2 x ln x
    = x ln(1 - h^2/x^2) + h [ln(1 + h/x) - ln(1 - h/x)]``.
    """
    if x_perp - h <= 0:
        raise DomainError("stencil crosses x_perp = 0")
    if not stable:
        f = phi_profile(cfg, np.array([x_perp - h, x_perp, x_perp + h]))
        return complex(1j * (f[0] - 2 * f[1] + f[2]) / h**2)
    t = h / x_perp
    d2 = x_perp * math.log1p(-t * t) + h * (math.log1p(t) - math.log1p(-t))
    return complex(1j * (-1j * cfg.flux) * d2 / h**2)


def _exponent(cfg: FieldConfig, x_perp, sign: int = 1):
    # exp(-i e phi sigma_B) = exp(g sigma_B) with g = -i e phi (real for real flux)
    return -1j * sign * cfg.charge * np.asarray(phi_profile(cfg, x_perp))


def exp_factor(cfg: FieldConfig, x_perp, sign: int = 1) -> np.ndarray:
    """``exp(-i e phi(x_perp) sigma_B)`` via the spectral projectors of ``sigma_B``.

    ``sign=-1`` returns the inverse factor.  Vectorized over ``x_perp``; the
    result has shape ``x_perp.shape + (2, 2)``.
    """
    x = np.asarray(x_perp, dtype=float)
    if np.any(x <= 0):
        raise DomainError("exp_factor requires x_perp > 0")
    g = _exponent(cfg, x, sign)
    if np.any(np.abs(g.real) > MAX_EXPONENT):
        worst = float(np.max(np.abs(g.real)))
        raise OverflowRepresentationError(
            f"exponent magnitude {worst:.3g} exceeds {MAX_EXPONENT}; use a log-scaled representation"
        )
    sb = cfg.sigma_b
    p_plus = 0.5 * (IDENTITY + sb)
    p_minus = 0.5 * (IDENTITY - sb)
    out = np.exp(g)[..., None, None] * p_plus + np.exp(-g)[..., None, None] * p_minus
    return out


def exp_factor_eigenvalue(cfg: FieldConfig, x_perp, s_b: int):
    """Eigenvalue of :func:`exp_factor` on the ``sigma_B = s_b`` eigenspinor."""
    if s_b not in (1, -1):
        raise DomainError("s_b must be +1 or -1")
    return np.exp(s_b * _exponent(cfg, x_perp))


@dataclass(frozen=True)
class GaugeScalarDoublet:
    """Gauge scalar doublet ``(phi1, phi1*)`` sampled on an ``(x_B, x_perp)`` grid.

    ``phi1`` has shape ``(len(x_b), len(x_perp))``; the second component is
    always the complex conjugate and is not stored.
    """

    x_b: np.ndarray
    x_perp: np.ndarray
    phi1: np.ndarray

    def __post_init__(self):
        xb = np.asarray(self.x_b, dtype=float)
        xp = np.asarray(self.x_perp, dtype=float)
        p = np.asarray(self.phi1, dtype=complex)
        if p.shape != (xb.size, xp.size):
            raise GridError(f"phi1 shape {p.shape} does not match grid ({xb.size}, {xp.size})")
        object.__setattr__(self, "x_b", xb)
        object.__setattr__(self, "x_perp", xp)
        object.__setattr__(self, "phi1", p)

    @property
    def u(self) -> np.ndarray:
        return self.phi1.real

    @property
    def v(self) -> np.ndarray:
        return self.phi1.imag

    @property
    def phi2(self) -> np.ndarray:
        return np.conj(self.phi1)

    @classmethod
    def from_components(
        cls,
        u: Callable[[np.ndarray], np.ndarray],
        v: Callable[[np.ndarray], np.ndarray],
        x_b,
        x_perp,
    ) -> "GaugeScalarDoublet":
        """Build ``phi1 = u(x_perp) + i v(x_B)``."""
        xb = np.asarray(x_b, dtype=float)
        xp = np.asarray(x_perp, dtype=float)
        phi1 = np.asarray(u(xp), dtype=float)[None, :] + 1j * np.asarray(v(xb), dtype=float)[:, None]
        return cls(xb, xp, phi1)

    @classmethod
    def from_profile(cls, cfg: FieldConfig, x_b, x_perp) -> "GaugeScalarDoublet":
        xb = np.asarray(x_b, dtype=float)
        xp = np.asarray(x_perp, dtype=float)
        phi1 = np.broadcast_to(phi_profile(cfg, xp), (xb.size, xp.size)).copy()
        return cls(xb, xp, phi1)

    def is_separable(self, tol: float = 1e-12) -> bool:
        """True when ``u`` varies only with ``x_perp`` and ``v`` only with ``x_B``."""
        scale = max(1.0, float(np.max(np.abs(self.phi1))))
        u_ok = np.max(np.abs(self.u - self.u[:1, :])) <= tol * scale
        v_ok = np.max(np.abs(self.v - self.v[:, :1])) <= tol * scale
        return bool(u_ok and v_ok)


def _spacing(axis: np.ndarray, name: str) -> float:
    if axis.size < 3:
        raise GridError(f"{name} axis needs at least 3 points, got {axis.size}")
    d = np.diff(axis)
    if np.any(d <= 0) or not np.allclose(d, d[0], rtol=1e-9, atol=0):
        raise GridError(f"{name} axis must be uniform and increasing")
    return float(d[0])


def _interior(a: np.ndarray) -> np.ndarray:
    return a[1:-1, 1:-1]


def removal_residual(
    doublet: GaugeScalarDoublet, a_z, a_perp, conjugate: bool = False
) -> float:
    """Largest violation of ``-d_perp phi = i A_z`` and ``d_B phi = A_perp``.

    Derivatives are central differences; boundary rows are excluded.  With
    ``conjugate=True`` the conditions on the second doublet component are
    checked as well (``-d_perp phi2 = i A_z``, ``d_B phi2 = -A_perp``).
    """
    hb = _spacing(doublet.x_b, "x_B")
    hp = _spacing(doublet.x_perp, "x_perp")
    a_z = np.broadcast_to(np.asarray(a_z, dtype=complex), doublet.phi1.shape)
    a_perp = np.broadcast_to(np.asarray(a_perp, dtype=complex), doublet.phi1.shape)

    comps = [(doublet.phi1, 1.0)]
    if conjugate:
        comps.append((doublet.phi2, -1.0))
    worst = 0.0
    for phi, b_sign in comps:
        d_b, d_p = np.gradient(phi, hb, hp)
        r1 = np.abs(_interior(d_p + 1j * a_z))
        r2 = np.abs(_interior(d_b - b_sign * a_perp))
        worst = max(worst, float(r1.max()), float(r2.max()))
    return worst


@dataclass(frozen=True)
class QuantizationRoot:
    n: int
    x_perp: float
    residual: float


def quantization_lhs(cfg: FieldConfig, x_perp):
    """Scalar left side ``flux x (ln(x/l0) - 1)`` of the quantization condition."""
    x = np.asarray(x_perp, dtype=float)
    return cfg.flux * x * (np.log(x / cfg.l0) - 1.0)


def quantize_positions(cfg: FieldConfig, n_max: int) -> list[QuantizationRoot]:
    """Positions ``x_perp >= e l0`` where ``flux x (ln(x/l0) - 1) = n pi``.

    Starting point ``x = l0 exp(W(n pi / (flux l0 e)) + 1)`` from the principal
    Lambert W, then bisection on a tight bracket around it.
    """
    if cfg.flux == 0:
        raise QuantizationError("no quantization without flux")
    if n_max < 0:
        raise DomainError("n_max must be >= 0")
    roots = []
    for n in range(n_max + 1):
        arg = n * math.pi / (cfg.flux * cfg.l0 * math.e)
        if arg < 0:
            raise QuantizationError(
                f"n={n}: Lambert-W argument {arg:.3g} < 0 leaves the x_perp >= e*l0 branch"
            )
        x0 = cfg.l0 * math.exp(float(lambertw(arg).real) + 1.0)

        def f(x, n=n):
            return float(quantization_lhs(cfg, x)) - n * math.pi

        lo, hi = x0 * (1 - 1e-9), x0 * (1 + 1e-9)
        if f(lo) * f(hi) > 0:
            # Lambert-W start too far off for the tight bracket
            lo, hi = cfg.l0 * math.e, max(2 * x0, cfg.l0 * math.e * 2)
            while f(hi) < 0:
                hi *= 2
        x = lo if f(lo) == 0 else bisect(f, lo, hi, xtol=4 * np.finfo(float).eps * x0, rtol=4 * np.finfo(float).eps, maxiter=400)
        roots.append(QuantizationRoot(n, float(x), abs(f(x))))
    return roots


def hall_current(n: int, x_perp: float, hbar: float = 1.0, c_light: float = 1.0, charge: float = 1.0) -> float:
    """Quantized surface current ``2 pi N hbar c / (e x_perp)``."""
    if x_perp <= 0:
        raise DomainError("hall_current requires x_perp > 0")
    if n < 0:
        raise DomainError("N must be >= 0")
    q = 2 * math.pi * hbar * c_light / (charge * x_perp)
    # keep 45 significant bits so that N q is exact for N < 256 and K(N) / K(1) == N
    m, e = math.frexp(q)
    q = math.ldexp(round(math.ldexp(m, 45)), e - 45)
    return n * q


@dataclass(frozen=True)
class SampledSpinorField:
    """Spinor values on a rectangular ``(x_B, x_perp)`` grid; shape ``(nB, nP, 2)``."""

    x_b: np.ndarray
    x_perp: np.ndarray
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        xb = np.asarray(self.x_b, dtype=float)
        xp = np.asarray(self.x_perp, dtype=float)
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (xb.size, xp.size, 2):
            raise GridError(f"values shape {vals.shape} does not match grid ({xb.size}, {xp.size}, 2)")
        object.__setattr__(self, "x_b", xb)
        object.__setattr__(self, "x_perp", xp)
        object.__setattr__(self, "values", vals)

    @property
    def spacing(self) -> tuple[float, float]:
        return _spacing(self.x_b, "x_B"), _spacing(self.x_perp, "x_perp")

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x_b, self.x_perp, indexing="ij")

    @classmethod
    def from_function(cls, fn, spinor, x_b, x_perp) -> "SampledSpinorField":
        """``fn(x_B, x_perp) * spinor`` on the grid."""
        xb = np.asarray(x_b, dtype=float)
        xp = np.asarray(x_perp, dtype=float)
        XB, XP = np.meshgrid(xb, xp, indexing="ij")
        f = np.broadcast_to(np.asarray(fn(XB, XP), dtype=complex), XB.shape)
        vals = f[..., None] * np.asarray(spinor, dtype=complex)
        return cls(xb, xp, vals)


WeylCase = Literal["eigen-sigma_z", "eigen-sigma_B"]


@dataclass(frozen=True)
class WeylCheck:
    residual: float
    majorana: bool | None = None
    majorana_phase: complex | None = None


def field_majorana_check(
    values: np.ndarray, tolerance: float = 1e-10, c: ChargeConjugation = MAJORANA_C
) -> tuple[bool, complex | None]:
    """Majorana test with one constant shared by every node of a sampled field."""
    v = np.asarray(values, dtype=complex).reshape(-1, 2)
    n2 = float(np.sum(np.abs(v) ** 2))
    if n2 == 0:
        raise DomainError("majorana check is undefined for a vanishing field")
    cv = c.apply_array(v)
    phase = complex(np.sum(np.conj(v) * cv) / n2)
    resid = math.sqrt(float(np.sum(np.abs(cv - phase * v) ** 2)) / n2)
    if resid <= tolerance and abs(abs(phase) - 1.0) <= tolerance:
        return True, phase
    return False, None


def weyl_solution_check(
    psi: SampledSpinorField,
    case: WeylCase,
    s: int,
    c: ChargeConjugation = MAJORANA_C,
    majorana_tol: float = 1e-10,
) -> WeylCheck:
    """Residual of the field-free reduced equation on the grid interior.

    ``eigen-sigma_z``: ``(d_B + i s d_perp) psi``, applied to both components.
    ``eigen-sigma_B``: ``d_B psi + (i/s) C d_perp psi`` with antilinear ``C``;
    the Majorana test of ``psi`` is reported alongside.
    """
    if s not in (1, -1):
        raise DomainError("s must be +1 or -1")
    hb, hp = psi.spacing
    d_b, d_p = np.gradient(psi.values, hb, hp, axis=(0, 1))
    if case == "eigen-sigma_z":
        res = d_b + 1j * s * d_p
        return WeylCheck(float(np.max(np.linalg.norm(_interior(res), axis=-1))))
    if case == "eigen-sigma_B":
        res = d_b + (1j / s) * c.apply_array(d_p)
        ok, phase = field_majorana_check(psi.values, majorana_tol, c)
        return WeylCheck(float(np.max(np.linalg.norm(_interior(res), axis=-1))), ok, phase)
    raise DomainError(f"unknown case {case!r}; expected 'eigen-sigma_z' or 'eigen-sigma_B'")


def inplane_dirac_apply(
    cfg: FieldConfig, field_: SampledSpinorField, a_z: np.ndarray, a_perp: np.ndarray
) -> np.ndarray:
    """Apply ``sigma_B d_B + sigma_perp (d_perp - i e A_perp) - i e sigma_z A_z``.

    Central differences; returns the full array, boundary rows included.
    """
    hb, hp = field_.spacing
    v = field_.values
    d_b, d_p = np.gradient(v, hb, hp, axis=(0, 1))
    e = cfg.charge
    sb, sp = make_inplane_basis(cfg.omega)
    out = d_b @ sb.T + (d_p - 1j * e * a_perp[..., None] * v) @ sp.T
    out = out - 1j * e * a_z[..., None] * (v @ SIGMA_Z.T)
    return out


def gauge_removal_integration(
    cfg: FieldConfig,
    psi: SampledSpinorField,
    s: int,
    case: WeylCase = "eigen-sigma_z",
    weyl_tol: float = 1e-6,
    exponent_sign: int = 1,
) -> float:
    """End-to-end check that the gauge scalar removes the in-plane potential.

    Builds ``phi_hat = exp(-i e phi sigma_B) psi``, derives ``A_z = i d_perp phi``
    and ``A_perp = d_B phi`` from the sampled gauge scalar, applies the full
    in-plane Dirac operator and returns the largest interior residual norm.
    ``exponent_sign=-1`` flips the exponent (used as a regression guard).
    """
    pre = weyl_solution_check(psi, case, s)
    if pre.residual > weyl_tol:
        raise DomainError(
            f"psi fails the reduced Weyl equation (residual {pre.residual:.3g} > {weyl_tol:.3g})"
        )
    hb, hp = psi.spacing
    m = exp_factor(cfg, psi.x_perp, sign=exponent_sign)  # (nP, 2, 2)
    phi_hat = np.einsum("pij,bpj->bpi", m, psi.values)
    phi = np.broadcast_to(phi_profile(cfg, psi.x_perp), (psi.x_b.size, psi.x_perp.size))
    d_b_phi, d_p_phi = np.gradient(phi, hb, hp, edge_order=2)
    a_z = 1j * d_p_phi
    a_perp = d_b_phi
    out = inplane_dirac_apply(cfg, SampledSpinorField(psi.x_b, psi.x_perp, phi_hat), a_z, a_perp)
    return float(np.max(np.linalg.norm(_interior(out), axis=-1)))


def convergence_order(err_coarse: float, err_fine: float, refinement: float = 2.0) -> float:
    return math.log(err_coarse / err_fine) / math.log(refinement)


def eigen_spinor(op: np.ndarray, s: int) -> np.ndarray:
    """Normalized eigenvector of a 2x2 Hermitian involution for eigenvalue ``s``."""
    w, vecs = np.linalg.eigh(op)
    return vecs[:, int(np.argmin(np.abs(w - s)))]


__all__ = [
    "FieldConfig",
    "GaugeScalarDoublet",
    "QuantizationRoot",
    "SampledSpinorField",
    "WeylCheck",
    "b_from_phi_fd",
    "b_profile",
    "convergence_order",
    "eigen_spinor",
    "exp_factor",
    "exp_factor_eigenvalue",
    "field_majorana_check",
    "gauge_removal_integration",
    "hall_current",
    "inplane_dirac_apply",
    "phi_profile",
    "quantization_lhs",
    "quantize_positions",
    "removal_residual",
    "weyl_solution_check",
]

_ = SIGMA_X  # re-exported for callers building test spinors
