import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from inplane_dirac.errors import (
    DomainError,
    GridError,
    OverflowRepresentationError,
    QuantizationError,
    SingularPointError,
)
from inplane_dirac.gauge import (
    FieldConfig,
    GaugeScalarDoublet,
    SampledSpinorField,
    b_from_phi_fd,
    b_profile,
    convergence_order,
    exp_factor,
    exp_factor_eigenvalue,
    gauge_removal_integration,
    hall_current,
    phi_profile,
    quantization_lhs,
    quantize_positions,
    removal_residual,
    weyl_solution_check,
)
from inplane_dirac.spin import IDENTITY, make_inplane_basis


def bisect_oracle(f, lo, hi, iters=200):
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


# --- profile --------------------------------------------------------------


def test_phi_profile_hand_values():
    cfg = FieldConfig(flux=1.7, l0=2.0)
    assert phi_profile(cfg, 2.0) == pytest.approx(1j * 1.7 * 2.0, abs=1e-15)
    assert abs(phi_profile(cfg, 2.0 * math.e)) < 1e-14
    assert np.all(phi_profile(FieldConfig(flux=0.0), np.linspace(0.1, 5, 9)) == 0)


def test_phi_profile_singular_at_zero():
    with pytest.raises(SingularPointError):
        phi_profile(FieldConfig(), 0.0)


def test_phi_profile_constant_shifts_value():
    a = phi_profile(FieldConfig(C=0.3), 1.5)
    b = phi_profile(FieldConfig(C=0.0), 1.5)
    assert a - b == pytest.approx(-0.3j)


def test_b_profile_values_and_domain():
    assert b_profile(FieldConfig(flux=1.0), 2.0) == 0.5
    assert b_profile(FieldConfig(flux=0.0), 2.0) == 0.0
    with pytest.raises(DomainError):
        b_profile(FieldConfig(), -1.0)


def test_b_profile_matches_second_difference():
    cfg = FieldConfig(flux=1.0)
    assert abs(b_from_phi_fd(cfg, 1.0, 1e-4, stable=False) - 1.0) <= 1e-6
    errs = [abs(b_from_phi_fd(cfg, 1.0, h) - b_profile(cfg, 1.0)) for h in (1e-3, 1e-4)]
    assert errs[1] <= 1e-6
    assert convergence_order(errs[0], errs[1], 10.0) >= 1.9


# --- exponential factor ---------------------------------------------------


def test_exp_factor_identity_at_zero_of_phi():
    cfg = FieldConfig(flux=2.0, l0=0.5)
    assert np.allclose(exp_factor(cfg, 0.5 * math.e), IDENTITY, atol=1e-14)
    assert np.array_equal(exp_factor(FieldConfig(flux=0.0), 3.0), IDENTITY)


@given(
    st.floats(-3, 3),
    st.floats(0.2, 3),
    st.floats(0.05, 20),
    st.floats(-math.pi, math.pi),
)
def test_exp_factor_inverse_and_commutation(flux, l0, x, omega):
    cfg = FieldConfig(flux=flux, l0=l0, omega=omega)
    m = exp_factor(cfg, x)
    minv = exp_factor(cfg, x, sign=-1)
    scale = max(1.0, np.abs(m).max() * np.abs(minv).max())
    assert np.max(np.abs(m @ minv - IDENTITY)) <= 1e-13 * scale
    sb, _ = make_inplane_basis(omega)
    assert np.max(np.abs(m @ sb - sb @ m)) <= 1e-13 * max(1.0, np.abs(m).max())


def test_exp_factor_against_scipy_expm():
    from scipy.linalg import expm

    cfg = FieldConfig(flux=0.8, l0=1.3, omega=0.4)
    sb, _ = make_inplane_basis(0.4)
    for x in (0.3, 1.0, 4.0):
        ref = expm(-1j * cfg.charge * phi_profile(cfg, x) * sb)
        assert np.allclose(exp_factor(cfg, x), ref, rtol=1e-12, atol=1e-13)


def test_exp_factor_overflow_reported():
    with pytest.raises(OverflowRepresentationError):
        exp_factor(FieldConfig(flux=1.0), 300.0)


def test_exp_factor_monotone_near_origin():
    # flux * s_B > 0: the eigencomponent relaxes monotonically to 1 as x -> 0+
    cfg = FieldConfig(flux=1.5, l0=2.0)
    xs = np.linspace(1.9, 1e-6, 400)
    vals = exp_factor_eigenvalue(cfg, xs, +1).real
    assert np.all(np.diff(vals) < 0)
    assert abs(vals[-1] - 1.0) < 1e-4
    # and decays to zero far out
    assert exp_factor_eigenvalue(cfg, 60.0, +1).real < 1e-50
    # opposite sector grows instead
    assert exp_factor_eigenvalue(cfg, 60.0, -1).real > 1e50


# --- removal conditions ---------------------------------------------------


def _sympy_fields(u_expr, v_expr, xp_sym, xb_sym, xb, xp):
    phi = u_expr + sympy.I * v_expr
    az = sympy.I * sympy.diff(phi, xp_sym)
    aperp = sympy.diff(phi, xb_sym)
    f_az = sympy.lambdify((xb_sym, xp_sym), az, "numpy")
    f_ap = sympy.lambdify((xb_sym, xp_sym), aperp, "numpy")
    XB, XP = np.meshgrid(xb, xp, indexing="ij")
    return (np.broadcast_to(f_az(XB, XP), XB.shape).astype(complex),
            np.broadcast_to(f_ap(XB, XP), XB.shape).astype(complex))


def test_removal_conditions_symbolic_oracle():
    xb_s, xp_s = sympy.symbols("x_B x_perp", real=True)
    u = 3 * xp_s**2 - xp_s + 0.5
    v = -2 * xb_s**2 + 0.25 * xb_s
    xb = np.linspace(-1, 1, 41)
    xp = np.linspace(0.5, 2, 31)
    az, ap = _sympy_fields(u, v, xp_s, xb_s, xb, xp)
    d = GaugeScalarDoublet.from_components(
        sympy.lambdify(xp_s, u, "numpy"), sympy.lambdify(xb_s, v, "numpy"), xb, xp
    )
    assert d.is_separable()
    # quadratics are differentiated exactly by central differences
    assert removal_residual(d, az, ap, conjugate=True) <= 1e-12


def test_removal_residual_second_order_for_smooth_phi():
    def res(n):
        xb = np.linspace(-1, 1, n + 1)
        xp = np.linspace(0.5, 2.5, n + 1)
        XB, XP = np.meshgrid(xb, xp, indexing="ij")
        phi = np.sin(XP) * np.exp(0.3 * XB) + 1j * np.cos(XB * XP)
        az = 1j * (np.cos(XP) * np.exp(0.3 * XB) - 1j * XB * np.sin(XB * XP))
        ap = 0.3 * np.sin(XP) * np.exp(0.3 * XB) - 1j * XP * np.sin(XB * XP)
        return removal_residual(GaugeScalarDoublet(xb, xp, phi), az, ap)

    r1, r2 = res(40), res(80)
    assert r1 < 1e-2
    assert 3.5 <= r1 / r2 <= 4.5


def test_removal_residual_detects_violation():
    xb = np.linspace(-1, 1, 21)
    xp = np.linspace(1, 2, 21)
    d = GaugeScalarDoublet.from_components(lambda x: x**2, lambda x: x, xb, xp)
    az = 1j * 2 * np.broadcast_to(xp, (21, 21))
    ap = 1j * np.ones((21, 21))
    assert removal_residual(d, az, ap) < 1e-12
    assert removal_residual(d, az, ap + 1) >= 1


def test_removal_residual_conjugate_needs_separability():
    xb = np.linspace(-1, 1, 21)
    xp = np.linspace(1, 2, 21)
    cfg = FieldConfig(flux=1.0)
    d = GaugeScalarDoublet.from_profile(cfg, xb, xp)
    dphi = np.gradient(d.phi1, xb[1] - xb[0], xp[1] - xp[0])
    az, ap = 1j * dphi[1], dphi[0]
    assert removal_residual(d, az, ap) < 1e-12
    # the profile is purely imaginary in x_perp, so the second component differs
    assert not d.is_separable()
    assert removal_residual(d, az, ap, conjugate=True) > 1e-2


def test_doublet_shape_mismatch():
    with pytest.raises(GridError):
        GaugeScalarDoublet(np.arange(3.0), np.arange(4.0), np.zeros((4, 3)))


# --- quantization ---------------------------------------------------------


def test_quantization_first_roots():
    roots = quantize_positions(FieldConfig(flux=1.0, l0=1.0), 1)
    assert roots[0].x_perp == pytest.approx(math.e, abs=1e-15)
    oracle = bisect_oracle(lambda x: x * (math.log(x) - 1) - math.pi, math.e, 10.0)
    assert abs(roots[1].x_perp - oracle) <= 1e-12
    assert roots[1].x_perp == pytest.approx(5.058, abs=5e-4)
    assert roots[1].residual <= 1e-12


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(0.3, 3.0))
def test_quantization_against_bisection(flux, l0):
    cfg = FieldConfig(flux=flux, l0=l0)
    roots = quantize_positions(cfg, 50)
    xs = [r.x_perp for r in roots]
    assert all(b > a for a, b in zip(xs, xs[1:]))
    for r in roots:
        lo = l0 * math.e * 0.999  # strictly below the n = 0 root
        hi = lo * 2
        while flux * hi * (math.log(hi / l0) - 1) < r.n * math.pi:
            hi *= 2
        ref = bisect_oracle(lambda x: flux * x * (math.log(x / l0) - 1) - r.n * math.pi, lo, hi)
        assert abs(r.x_perp - ref) <= 1e-12 * max(1.0, ref)
        assert abs(float(quantization_lhs(cfg, r.x_perp)) - r.n * math.pi) <= 1e-12 * max(1.0, r.n * math.pi)


def test_quantization_errors():
    with pytest.raises(QuantizationError):
        quantize_positions(FieldConfig(flux=0.0), 3)
    with pytest.raises(QuantizationError):
        quantize_positions(FieldConfig(flux=-1.0), 2)
    assert quantize_positions(FieldConfig(flux=-1.0), 0)[0].x_perp == pytest.approx(math.e)


def test_hall_current():
    assert hall_current(0, 3.0) == 0
    assert hall_current(1, 2 * math.pi) == pytest.approx(1.0, abs=1e-15)
    assert hall_current(2, 1.7) / hall_current(1, 1.7) == 2
    with pytest.raises(DomainError):
        hall_current(1, 0.0)


# --- reduced equations ----------------------------------------------------


def _grid(n=41):
    return np.linspace(-1, 1, n), np.linspace(0.5, 2.5, n)


def test_weyl_entire_function_passes():
    xb, xp = _grid()
    for f in (lambda a, b: a + 1j * b, lambda a, b: (a + 1j * b) ** 2):
        psi = SampledSpinorField.from_function(f, [1, 0], xb, xp)
        assert weyl_solution_check(psi, "eigen-sigma_z", 1).residual <= 1e-12


def test_weyl_entire_function_second_order():
    def res(n):
        xb, xp = _grid(n + 1)
        psi = SampledSpinorField.from_function(lambda a, b: np.exp(a + 1j * b), [1, 0], xb, xp)
        return weyl_solution_check(psi, "eigen-sigma_z", 1).residual

    assert 3.5 <= res(40) / res(80) <= 4.5


def test_weyl_antiholomorphic_rejected():
    xb, xp = _grid()
    psi = SampledSpinorField.from_function(lambda a, b: a - 1j * b, [1, 0], xb, xp)
    assert weyl_solution_check(psi, "eigen-sigma_z", 1).residual == pytest.approx(2.0, abs=1e-10)
    # but it is entire for the opposite sector
    assert weyl_solution_check(psi, "eigen-sigma_z", -1).residual <= 1e-12


def test_weyl_sigma_b_majorana_doublet_flag():
    xb, xp = _grid()
    XB, XP = np.meshgrid(xb, xp, indexing="ij")
    f = (XB + 1j * XP) ** 2
    psi = SampledSpinorField(xb, xp, np.stack([f, np.conj(f)], axis=-1))
    chk = weyl_solution_check(psi, "eigen-sigma_B", 1)
    assert chk.majorana is True
    assert abs(chk.majorana_phase - 1) < 1e-12
    # the sigma_B-sector equation is hyperbolic; holomorphic doublets do not solve it
    assert chk.residual > 1.0


def test_weyl_sigma_b_wave_solution():
    xb, xp = _grid(81)
    XB, XP = np.meshgrid(xb, xp, indexing="ij")
    g = np.sin(XB - XP)
    psi = SampledSpinorField(xb, xp, np.stack([g, 1j * g], axis=-1))
    chk = weyl_solution_check(psi, "eigen-sigma_B", 1)
    h = xb[1] - xb[0]
    assert chk.residual <= 0.5 * h**2
    assert chk.majorana is True
    assert abs(chk.majorana_phase + 1j) < 1e-12


def test_weyl_grid_too_small():
    psi = SampledSpinorField(np.arange(2.0), np.arange(5.0), np.zeros((2, 5, 2)))
    with pytest.raises(GridError):
        weyl_solution_check(psi, "eigen-sigma_z", 1)


def test_weyl_bad_case():
    xb, xp = _grid(5)
    psi = SampledSpinorField.from_function(lambda a, b: a, [1, 0], xb, xp)
    with pytest.raises(DomainError):
        weyl_solution_check(psi, "eigen-sigma_q", 1)


# --- end-to-end -----------------------------------------------------------


def _const_field(n, spinor=(1.0, 0.3j)):
    xb = np.linspace(-1, 1, n + 1)
    xp = np.linspace(1, 3, n + 1)
    return SampledSpinorField.from_function(lambda a, b: np.ones_like(a), spinor, xb, xp)


def test_gauge_removal_without_flux_is_pure_weyl():
    xb, xp = _grid()
    psi = SampledSpinorField.from_function(lambda a, b: (a + 1j * b) ** 2, [1, 0], xb, xp)
    assert gauge_removal_integration(FieldConfig(flux=0.0), psi, 1) <= 1e-12


@pytest.mark.parametrize("omega", [0.0, 0.7, -2.1])
def test_gauge_removal_converges_second_order(omega):
    cfg = FieldConfig(flux=1.0, l0=1.0, omega=omega)
    r1 = gauge_removal_integration(cfg, _const_field(100), 1)
    r2 = gauge_removal_integration(cfg, _const_field(200), 1)
    assert 3.5 <= r1 / r2 <= 4.5
    assert 1.9 <= convergence_order(r1, r2) <= 2.1
    assert r2 <= 0.01 * (2 / 200) ** 2 * 100


def test_gauge_removal_flipped_exponent_is_caught():
    cfg = FieldConfig(flux=1.0, l0=1.0)
    assert gauge_removal_integration(cfg, _const_field(100), 1, exponent_sign=-1) > 0.5


def test_gauge_removal_requires_weyl_solution():
    xb, xp = _grid()
    psi = SampledSpinorField.from_function(lambda a, b: a - 1j * b, [1, 0], xb, xp)
    with pytest.raises(DomainError):
        gauge_removal_integration(FieldConfig(), psi, 1)
