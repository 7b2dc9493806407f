"""Pauli algebra in rotated and cylindrical frames, plus charge conjugation.

Spin operators are plain 2x2 complex ``numpy`` arrays.  Spinors are
:class:`Spinor2` values.  Charge conjugation is antilinear: it is stored as a
matrix part together with complex conjugation, ``C psi = M psi*``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# Matrix part of the Majorana-convention charge conjugation C psi = sigma_x psi*.
# With it the doublet (a, a*) is the +1 eigenstate and C^2 = 1.
MAJORANA_CONJUGATION_MATRIX = SIGMA_X


@dataclass(frozen=True)
class Spinor2:
    up: complex
    down: complex

    def __post_init__(self):
        if not (np.isfinite(self.up) and np.isfinite(self.down)):
            raise DomainError(f"spinor components must be finite, got ({self.up}, {self.down})")

    @classmethod
    def from_array(cls, arr) -> "Spinor2":
        arr = np.asarray(arr, dtype=complex).reshape(2)
        return cls(complex(arr[0]), complex(arr[1]))

    def as_array(self) -> np.ndarray:
        return np.array([self.up, self.down], dtype=complex)

    def norm2(self) -> float:
        return abs(self.up) ** 2 + abs(self.down) ** 2

    def norm(self) -> float:
        return math.sqrt(self.norm2())

    def normalized(self) -> "Spinor2":
        n = self.norm()
        if n == 0:
            raise DomainError("cannot normalize the zero spinor")
        return Spinor2(self.up / n, self.down / n)

    def scaled(self, a: complex) -> "Spinor2":
        return Spinor2(a * self.up, a * self.down)


def _check_angle(*angles):
    for a in angles:
        if not math.isfinite(a):
            raise DomainError(f"angle must be finite, got {a}")


def make_inplane_basis(omega: float) -> tuple[np.ndarray, np.ndarray]:
    """Spin operators along the in-plane field and perpendicular to it.

    ``omega`` is the field angle measured from the x axis.  Returns
    ``(sigma_B, sigma_perp)`` with ``sigma_B sigma_perp = i sigma_z``.
    """
    _check_angle(omega)
    c, s = math.cos(omega), math.sin(omega)
    sigma_b = c * SIGMA_X + s * SIGMA_Y
    sigma_perp = -s * SIGMA_X + c * SIGMA_Y
    return sigma_b, sigma_perp


def make_cyl_basis(phi: float, omega: float) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Radial/azimuthal spin operators at polar angle ``phi`` and the in-plane
    pair re-expressed through them.

    Returns ``(sigma_rho, sigma_phi, sigma_B, sigma_perp)``.
    """
    _check_angle(phi, omega)
    sigma_rho = math.cos(phi) * SIGMA_X + math.sin(phi) * SIGMA_Y
    sigma_phi = math.cos(phi) * SIGMA_Y - math.sin(phi) * SIGMA_X
    d = omega - phi
    sigma_b = math.cos(d) * sigma_rho + math.sin(d) * sigma_phi
    sigma_perp = math.cos(d) * sigma_phi - math.sin(d) * sigma_rho
    return sigma_rho, sigma_phi, sigma_b, sigma_perp


def rotation_about(axis: np.ndarray, angle: float) -> np.ndarray:
    """``exp(-i angle axis / 2)`` for an operator ``axis`` that squares to 1."""
    return math.cos(angle / 2) * IDENTITY - 1j * math.sin(angle / 2) * axis


@dataclass(frozen=True)
class ChargeConjugation:
    """Antilinear charge conjugation ``psi -> matrix_part @ conj(psi)``."""

    matrix_part: np.ndarray = MAJORANA_CONJUGATION_MATRIX
    conjugates: bool = True

    def __post_init__(self):
        if not self.conjugates:
            raise DomainError("charge conjugation is always antilinear")
        m = np.asarray(self.matrix_part, dtype=complex)
        if m.shape != (2, 2):
            raise DomainError(f"matrix part must be 2x2, got shape {m.shape}")
        object.__setattr__(self, "matrix_part", m)

    def apply_array(self, psi: np.ndarray) -> np.ndarray:
        """Apply to arrays whose last axis holds the two spinor components."""
        return np.conj(psi) @ self.matrix_part.T

    def squared_matrix(self) -> np.ndarray:
        """Matrix of C^2, i.e. ``M conj(M)``."""
        return self.matrix_part @ np.conj(self.matrix_part)


MAJORANA_C = ChargeConjugation()


def apply_charge_conjugation(c: ChargeConjugation, psi: Spinor2) -> Spinor2:
    return Spinor2.from_array(c.apply_array(psi.as_array()))


def majorana_check(
    psi: Spinor2, tolerance: float = 1e-12, c: ChargeConjugation = MAJORANA_C
) -> tuple[bool, complex | None]:
    """Test ``C psi = c psi`` for a unimodular constant ``c``.

    The best-fit constant is the projection ``<psi, C psi> / <psi, psi>``.
    Returns ``(True, c)`` when the relative residual and ``||c| - 1|`` are both
    within ``tolerance``; otherwise ``(False, None)``.
    """
    v = psi.as_array()
    n2 = float(np.vdot(v, v).real)
    if n2 == 0:
        raise DomainError("majorana_check is undefined for the zero spinor")
    cv = c.apply_array(v)
    phase = complex(np.vdot(v, cv) / n2)
    resid = np.linalg.norm(cv - phase * v) / math.sqrt(n2)
    if resid <= tolerance and abs(abs(phase) - 1.0) <= tolerance:
        return True, phase
    return False, None


def inplane_conjugation_matrix(omega: float) -> np.ndarray:
    """Charge-conjugation matrix ``i sigma_perp`` of the field-aligned frame.

    In the frame where ``sigma_B`` plays the role of ``sigma_x`` this is the
    usual two-component ``i sigma_y``.  It is the matrix for which
    ``-sigma_B sigma_z = C``, the identity that turns the B-direction momentum
    into a non-abelian covariant derivative.
    """
    _, sigma_perp = make_inplane_basis(omega)
    return 1j * sigma_perp


def generalized_momentum_identity(
    a_z: float,
    omega: float,
    charge: float = 1.0,
    conjugation_matrix: np.ndarray | None = None,
) -> float:
    """Max deviation between ``-i e sigma_B sigma_z A_z`` and ``i e C A_z``.

    Both sides are compared as linear maps on the standard spinor basis, with
    ``C`` represented by its matrix part.  ``sigma_B sigma_z`` is obtained by
    explicit matrix multiplication.  The default matrix is
    :func:`inplane_conjugation_matrix`; passing the Majorana convention
    ``sigma_x`` exposes the mismatch between the two conventions.
    """
    if not (math.isfinite(a_z) and math.isfinite(omega) and math.isfinite(charge)):
        raise DomainError("inputs must be finite")
    m = inplane_conjugation_matrix(omega) if conjugation_matrix is None else np.asarray(conjugation_matrix)
    sigma_b, _ = make_inplane_basis(omega)
    lhs = -1j * charge * a_z * (sigma_b @ SIGMA_Z)
    rhs = 1j * charge * a_z * m
    # columns of (lhs - rhs) are its action on the basis spinors
    return float(np.max(np.abs(lhs - rhs)))
