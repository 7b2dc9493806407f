"""Scenario pipelines behind the command line."""

from __future__ import annotations

import math

import numpy as np

from .config import RunConfig
from .errors import AmbiguousCountError, PhysicsInvariantError
from .gauge import FieldConfig, SampledSpinorField, gauge_removal_integration, hall_current, quantize_positions
from .lattice import ac_theorem_check, gaussian_flux, strict_count
from .parallel import parallel_map
from .ring import (
    RingParams,
    derive,
    filter_case_a_roots,
    filter_case_b_condition,
    s_matrix,
    transmission_sweep,
    transmissions_analytic,
)
from .table import ResultTable

UNITARITY_TOL = 1e-10


def _ac_point(args):
    L, h, charge, nu, threshold, ambiguous_below = args
    try:
        r = ac_theorem_check(gaussian_flux(L, nu, h=h, charge=charge), threshold, ambiguous_below)
        return r.observed_N, r.gap_ratio, 0, r.sector_counts
    except AmbiguousCountError as exc:
        sv = np.asarray(exc.singular_values)
        ratio = float(np.max(sv[1:] / sv[:-1]))
        return -1, ratio, 1, (0, 0)


def run_ac_theorem(cfg: RunConfig, jobs: int = 1) -> ResultTable:
    p = cfg.parameters
    sizes = [p["L"]] + ([p["compare_L"]] if p["compare_L"] else [])
    tasks = [(L, p["h"], p["charge"], nu, p["threshold"], p["ambiguous_below"]) for nu in p["fluxes"] for L in sizes]
    res = parallel_map(_ac_point, tasks, jobs)
    cols = ["index", "flux", "L", "predicted_N", "strict_N", "observed_N", "modes_up", "modes_down",
            "gap_ratio", "ambiguous", "agrees"]
    units = ["1", "flux quanta", "sites", "1", "1", "1", "1", "1", "1", "1", "1"]
    t = ResultTable(cols, units, metadata={
        "tags": {c: "zero-mode count" for c in cols} | {"index": "plumbing"},
        "threshold": p["threshold"],
        "ambiguous_below": p["ambiguous_below"],
        "flux_profile": "gaussian sigma=L*h/12, support L*h/4",
        "species_degeneracy": 4,
    })
    for i, ((L, _, _, nu, _, _), (obs, ratio, amb, (up, dn))) in enumerate(zip(tasks, res)):
        pred = math.floor(abs(nu))
        t.append((i, nu, L, pred, strict_count(nu), obs, up, dn, ratio, amb, int(obs == pred)))
    return t


def _gauge_point(args):
    fc, xb, xp, n = args
    xbv = np.linspace(xb[0], xb[1], n + 1)
    xpv = np.linspace(xp[0], xp[1], n + 1)
    psi = SampledSpinorField.from_function(lambda a, b: np.ones_like(a), [1.0, 0.0], xbv, xpv)
    r = gauge_removal_integration(fc, psi, 1)
    bad = gauge_removal_integration(fc, psi, 1, exponent_sign=-1)
    return xpv[1] - xpv[0], r, bad


def run_gauge_removal(cfg: RunConfig, jobs: int = 1) -> ResultTable:
    p = cfg.parameters
    fc = FieldConfig(flux=p["flux"], l0=p["l0"], omega=p["omega"], charge=p["charge"])
    ns = sorted(p["intervals"])
    res = parallel_map(
        _gauge_point, [(fc, (p["x_b_min"], p["x_b_max"]), (p["x_perp_min"], p["x_perp_max"]), n) for n in ns], jobs
    )
    cols = ["index", "intervals", "h", "residual", "order", "flipped_sign_residual"]
    t = ResultTable(cols, ["1", "1", "length", "1", "1", "1"], metadata={
        "tags": {"index": "plumbing", "intervals": "plumbing", "h": "plumbing", "residual": "gauge removal",
                 "order": "gauge removal", "flipped_sign_residual": "gauge removal"},
        "state": "constant spinor (1, 0)",
    })
    prev = None
    for i, (n, (h, r, bad)) in enumerate(zip(ns, res)):
        order = math.log(prev[1] / r) / math.log(prev[0] / h) if prev and r > 0 else float("nan")
        t.append((i, n, h, r, order, bad))
        prev = (h, r)
    return t


def run_quantization(cfg: RunConfig, jobs: int = 1) -> ResultTable:
    p = cfg.parameters
    fc = FieldConfig(flux=p["flux"], l0=p["l0"], charge=p["charge"], hbar=p["hbar"], c_light=p["c_light"])
    roots = quantize_positions(fc, p["n_max"])
    cols = ["n", "x_perp", "residual", "K", "K_over_K1"]
    t = ResultTable(cols, ["1", "length", "1", "current/length", "1"], metadata={
        "tags": {"n": "quantization", "x_perp": "quantization", "residual": "quantization",
                 "K": "hall current", "K_over_K1": "hall current"},
        "branch": "x_perp >= e*l0",
    })
    for r in roots:
        k = hall_current(r.n, r.x_perp, p["hbar"], p["c_light"], p["charge"])
        k1 = hall_current(1, r.x_perp, p["hbar"], p["c_light"], p["charge"])
        t.append((r.n, r.x_perp, r.residual, k, k / k1))
    if any(r.residual > 1e-12 for r in roots):
        raise PhysicsInvariantError("quantization residual above 1e-12")
    return t


def run_ring_sweep(cfg: RunConfig, jobs: int = 1) -> ResultTable:
    p = cfg.parameters
    params = RingParams(rho=p["rho"], theta=p["theta"], b_pl=p["b_pl"], m_eff=p["m_eff"],
                        charge=p["charge"], hbar=p["hbar"])
    values = np.linspace(p["start"], p["stop"], p["points"])
    t = transmission_sweep(params, values, p["vary"], p["energy"], jobs)
    # seeded spot checks of unitarity away from the sweep line
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    for _ in range(p["spot_checks"]):
        E = float(rng.uniform(0.05, 5.0))
        xi = float(rng.uniform(-3.0, 3.0))
        worst = max(worst, s_matrix(params.replace(theta=xi, b_pl=0.0), E).unitarity_error())
    t.metadata["seed"] = cfg.seed
    t.metadata["spot_check_unitarity"] = worst
    sweep_worst = max(t.column("unitarity_error"))
    if max(worst, sweep_worst) > UNITARITY_TOL:
        raise PhysicsInvariantError(f"S-matrix unitarity breach {max(worst, sweep_worst):.3g}")
    return t


def run_filter_design(cfg: RunConfig, jobs: int = 1) -> ResultTable:
    p = cfg.parameters
    rho = p["rho"]
    cols = ["n", "xi_rho", "xi", "phi_T", "approx_xi_rho", "approx_phi_T", "approx_deviation",
            "T_analytic", "T_smatrix_max"]
    units = ["1", "1", "length^-1", "1", "1", "1", "1", "1", "1"]
    t = ResultTable(cols, units, metadata={
        "tags": {c: "filter design" for c in cols},
        "approx_note": "small-radius values sqrt(n + 3/2), comparison only",
    })
    for r in filter_case_a_roots(rho, p["n_max"]):
        xi = r.xi_rho / rho
        params = RingParams(rho=rho, theta=xi, charge=p["charge"])
        d = derive(params)
        ta = transmissions_analytic(d)
        s = s_matrix(params, p["energy"])
        if s.unitarity_error() > UNITARITY_TOL:
            raise PhysicsInvariantError("S-matrix unitarity breach")
        t.append((r.n, r.xi_rho, xi, r.phi_t, r.approx_xi_rho, r.approx_phi_t, r.approx_deviation,
                  max(ta.uu, ta.dd), float(s.transmissions().as_array().max())))
    if not math.isnan(p["theta"]):
        b_pl = p["theta"] / (4 * p["charge"])
        t.metadata["case_b"] = {
            "theta": p["theta"],
            "b_pl_for_zero_xi": b_pl,
            "residual": filter_case_b_condition(RingParams(rho=rho, theta=p["theta"], b_pl=b_pl, charge=p["charge"])),
        }
    return t


RUNNERS = {
    "ac-theorem": run_ac_theorem,
    "gauge-removal": run_gauge_removal,
    "quantization": run_quantization,
    "ring-sweep": run_ring_sweep,
    "filter-design": run_filter_design,
}


def run_scenario(cfg: RunConfig, jobs: int = 1) -> ResultTable:
    t = RUNNERS[cfg.scenario](cfg, jobs)
    t.metadata["scenario"] = cfg.scenario
    t.metadata["units"] = "natural (e = hbar = c = 1 unless overridden)"
    return t
