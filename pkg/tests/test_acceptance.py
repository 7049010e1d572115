"""Acceptance suite: eleven end-to-end criteria, one printed verdict each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  Preset experiments are executed once and shared across criteria;
the whole suite takes a few minutes (dense eigendecompositions dominate).
"""

import numpy as np
import pytest

from momentlab.experiments import run_experiment
from momentlab.operators import (
    build_hamiltonian,
    equivalence_probe,
    potential_from_expression,
    random_band_limited_ensemble,
)
from momentlab.grid import make_grid
from momentlab.presets import preset_config

_reports = {}


def report_for(name):
    if name not in _reports:
        _reports[name] = run_experiment(preset_config(name))
    return _reports[name]


def check(report, name):
    for c in report["checks"]:
        if c["name"] == name:
            return c
    raise KeyError(name)


def verdict(num, description, ok):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d}: {description}"
    print(line)
    assert ok, line


def test_criterion_01_free_hs_conservation():
    c = check(report_for("free_gaussian_s1"), "hs_conservation")
    drift = c["measured"]["max_drift"]
    verdict(1, f"free H^s drift {drift:.2e} < 1e-12 for s in {{1,2,3}}",
            c["status"] == "pass" and drift < 1e-12)


def test_criterion_02_free_moment_law_and_limit():
    rep = report_for("free_gaussian_s1")
    law = check(rep, "moment_law_free")
    lim = check(rep, "moment_limit_free")
    law_err = law["measured"]["max_relative_error"]
    lim_err = lim["measured"]["relative_error"]
    ok = (law["status"] == "pass" and law_err < 1e-6
          and lim["status"] == "pass" and lim_err < 0.005)
    verdict(2, f"moment law err {law_err:.2e} < 1e-6, "
               f"limit err {lim_err:.2e} < 0.5%", ok)


def test_criterion_03_profile_theorem():
    rep = report_for("free_gaussian_s1")
    iso = check(rep, "profile_isometry")
    dec = check(rep, "profile_error_decreasing")
    ok = (iso["status"] == "pass"
          and iso["measured"]["max_relative_error"] < 1e-8
          and dec["status"] == "pass"
          and dec["measured"]["strictly_decreasing"]
          and dec["measured"]["final"] < 0.05)
    verdict(3, f"profile isometry {iso['measured']['max_relative_error']:.1e}, "
               f"error at t=64 {dec['measured']['final']:.4f} < 0.05", ok)


def test_criterion_04_norm_equivalence():
    grid = make_grid(2048, 200.0)
    ensemble = random_band_limited_ensemble(grid, 20, seed=20243)

    H0 = build_hamiltonian(grid, potential_from_expression(grid, "zero"))
    c0, C0 = equivalence_probe(H0, 2, ensemble)
    zero_ok = abs(c0 - 1.0) < 1e-10 and abs(C0 - 1.0) < 1e-10

    Hw = build_hamiltonian(grid, potential_from_expression(grid, "sech2(1.0)"))
    cw, Cw = equivalence_probe(Hw, 2, ensemble)
    finite_ok = 0.0 < cw <= Cw < np.inf
    # regression baseline must reproduce bit-exactly on repeat
    repeat = equivalence_probe(
        Hw, 2, random_band_limited_ensemble(grid, 20, seed=20243)
    )
    verdict(4, f"V=0 ratios ({c0:.12f}, {C0:.12f}); "
               f"well baseline ({cw:.6f}, {Cw:.6f}) reproducible",
            zero_ok and finite_ok and repeat == (cw, Cw))


def test_criterion_05_linear_isometry_and_sigma_growth():
    rep = report_for("linear_sech2_s2")
    hsv = check(rep, "hsv_conservation")
    ratio = check(rep, "moment_ratio_bounded")
    drift = hsv["measured"]["max_drift"]
    spread = ratio["measured"]["spread"]
    verdict(5, f"H^s_V drift {drift:.2e} < 1e-10, "
               f"Sigma_2/<t>^4 dyadic spread {spread:.2f} < 10",
            drift < 1e-10 and ratio["status"] == "pass" and spread < 10)


def test_criterion_06_linear_moment_theorem_two_paths():
    c = check(report_for("linear_sech2_s1"), "theorem_v0")
    m = c["measured"]
    ok = (c["status"] == "pass"
          and m["linear_discrepancy"] < 0.02
          and m["cross_discrepancy"] < 0.02)
    verdict(6, f"limit vs operator norm {m['linear_discrepancy']:.2e}, "
               f"operator vs extracted state {m['cross_discrepancy']:.2e}, "
               f"both < 2%", ok)


def test_criterion_07_nls_scattering_both_potentials():
    ok = True
    parts = []
    for name in ("nls_quintic_s1", "nls_quintic_sech2_s1"):
        rep = report_for(name)
        ext = check(rep, "extraction_cauchy")
        thm = check(rep, "theorem_main")
        dec = check(rep, "decay_trend")
        final = ext["measured"]["hs_increments"][-1]
        disc = thm["measured"]["scatter_discrepancy"]
        ok = (ok and ext["status"] == "pass"
              and ext["measured"]["decreasing"] and final < 1e-3
              and thm["status"] == "pass" and disc < 0.03
              and dec["status"] == "pass")
        parts.append(f"{name}: increment {final:.1e}, discrepancy {disc:.1e}")
    verdict(7, "; ".join(parts), ok)


def test_criterion_08_pseudoconformal():
    free = check(report_for("free_gaussian_s1"), "pseudoconformal_free")
    nls = check(report_for("nls_quintic_s1"), "pseudoconformal_bound")
    dev = free["measured"]["max_relative_deviation"]
    ratio = nls["measured"]["ratio"]
    verdict(8, f"free deviation {dev:.2e} < 1e-8, NLS peak ratio "
               f"{ratio:.6f} <= 1.05",
            dev < 1e-8 and nls["status"] == "pass" and ratio <= 1.05)


def test_criterion_09_gronwall_suite():
    rep = report_for("gronwall_suite")
    dom = check(rep, "gronwall_dominance")
    sat = check(rep, "gronwall_saturators")
    exp = check(rep, "gronwall_exponent")
    ok = (dom["measured"]["violations"] == 0
          and sat["status"] == "pass" and exp["status"] == "pass")
    verdict(9, f"dominance violations {dom['measured']['violations']}/1000, "
               "saturators below bound, beta=0 exponent exact", ok)


def test_criterion_10_cone_tails():
    c = check(report_for("free_gaussian_s1"), "cone_tail")
    shares = c["measured"]["outside_shares"]
    ok = (c["measured"]["non_increasing"] and shares[-1] < 1e-6)
    verdict(10, f"outside-cone share at R=8 is {shares[-1]:.2e} < 1e-6, "
                "non-increasing in R", ok)


def test_criterion_11_integrator_order():
    c = check(report_for("nls_quintic_s1"), "strang_order")
    m = c["measured"]
    ok = 3.5 <= m["ratio"] <= 4.5 and m["max_mass_drift"] < 1e-12
    verdict(11, f"energy-drift ratio {m['ratio']:.3f} in [3.5, 4.5], "
                f"mass drift {m['max_mass_drift']:.2e} < 1e-12", ok)
