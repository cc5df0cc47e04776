"""Acceptance suite: one test per criterion, each at the stated tolerance.

Every test prints ``[PASS]`` or ``[FAIL]`` lines so that ``pytest -s`` (or the
captured output of a failure) reads as a report.  Studies run at their shipped
defaults through the same runners the CLI uses.
"""

import math
import os
import time

import numpy as np
import pytest

from planevortex.fields import AnnulusRegion, GridSpec2D, VectorField2D, h1_parts
from planevortex.stationary import make_sigma1
from planevortex.studies import STUDIES, Context

WORKERS = os.cpu_count() or 1


def report(criterion, label, ok, detail=""):
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {label} {detail}".rstrip())
    return ok


def run_study(name, seed=1, **overrides):
    study = STUDIES[name]
    params = dict(study.defaults, **overrides)
    t0 = time.perf_counter()
    result = study.runner(params, Context(workers=WORKERS, seed=seed))
    return result, time.perf_counter() - t0


def checks_of(result):
    return {c.name: c for c in result.checks}


def print_checks(criterion, result):
    for c in result.checks:
        report(criterion, c.name, c.passed, f"= {c.value} ({c.relation} {c.threshold})")


def test_criterion_01_biot_savart_oracle():
    result, _ = run_study("biot-savart-oracle")
    print_checks(1, result)
    c = checks_of(result)
    assert STUDIES["biot-savart-oracle"].defaults["n"] == 32
    assert c["rel_l2"].threshold == 1e-8 and c["fast_seconds"].threshold == 5.0
    assert result.passed


@pytest.mark.xfail(strict=True, reason="the three stated values are mutually inconsistent; see the decisions ledger")
def test_criterion_02_stationary_closed_forms():
    # unit circulation: |sigma_1| = 1 / (2 pi r) outside the core
    vortex = make_sigma1()
    s = float(np.hypot(*vortex.velocity(np.array(2.0), np.array(0.0))))
    ok_speed = report(2, "|sigma_1((2,0))| = 0.5", abs(s - 0.5) <= 1e-10, f"measured {s:.12g}")

    dpsi = float(vortex.stream(2.0) - vortex.stream(1.0))
    ok_psi = report(2, "psi(2) - psi(1) = ln2/(2 pi)", abs(dpsi - math.log(2) / (2 * math.pi)) <= 1e-8,
                    f"measured {dpsi:.12g}")

    g = GridSpec2D(2.5, 1024)
    u = VectorField2D(g, np.array(vortex.velocity(*g.mesh)))
    l2, grad = h1_parts(u, AnnulusRegion(1.0, 2.0))
    sq = l2 * l2 + grad * grad
    target = 2 * math.pi * math.log(2) + 0.75 * math.pi
    ok_norm = report(2, "annulus H^1 norm squared = 6.71137", abs(sq - target) <= 1e-2 * target,
                     f"measured {sq:.6g}")
    assert ok_speed and ok_psi and ok_norm


def test_criterion_03_lamb_oseen():
    result, elapsed = run_study("lamb-oseen")
    print_checks(3, result)
    p = STUDIES["lamb-oseen"].defaults
    assert (p["n"], p["nu"], p["t"], p["tol"]) == (256, 1e-2, 1.0, 1e-4)
    assert report(3, "runtime < 120 s", elapsed < 120.0, f"= {elapsed:.1f} s")
    assert result.passed


def test_criterion_04_radial_euler():
    result, _ = run_study("radial-euler")
    print_checks(4, result)
    p = STUDIES["radial-euler"].defaults
    assert p["t"] == 1.0 and p["tol"] == 1e-5
    assert result.passed


def test_criterion_05_circulation():
    result, _ = run_study("damped-circulation")
    print_checks(5, result)
    c = checks_of(result)
    assert {"conservation_nu_0", "conservation_nu_0.01"} <= set(c)
    assert c["conservation_nu_0"].threshold == 1e-8 and c["damped_deviation"].threshold == 1e-10
    assert STUDIES["damped-circulation"].defaults["eta"] == 0.0
    assert result.passed


def test_criterion_06_projection_error():
    result, _ = run_study("projection-error")
    print_checks(6, result)
    p = STUDIES["projection-error"].defaults
    assert p["m"] == 5 and p["R_list"] == [4.0, 8.0, 16.0] and p["C_max"] == 4.0
    C = checks_of(result)["C"].value
    for row in result.tables["projection"]:
        report(6, f"R = {row['R']:g} bound", row["err_h1"] <= C * row["m_beta"] * (1 + 1e-12),
               f"err {row['err_h1']:.4g}, 5 beta(R) = {row['m_beta']:.4g}")
    assert result.passed


def test_criterion_07_expanding_domain():
    result, elapsed = run_study("expanding-domain", seed=5)
    print_checks(7, result)
    p = STUDIES["expanding-domain"].defaults
    assert p["R_list"] == [4.0, 8.0, 16.0] and p["nu"] == 1e-2 and p["T"] == 0.5 and p["ratio_max"] == 0.5
    assert report(7, "runtime < 900 s", elapsed < 900.0, f"= {elapsed:.1f} s")
    assert result.passed


def test_criterion_08_vanishing_viscosity():
    result, _ = run_study("vanishing-viscosity", seed=5)
    print_checks(8, result)
    p = STUDIES["vanishing-viscosity"].defaults
    assert p["nus"] == [1e-1, 5e-2, 2.5e-2, 1.25e-2]
    assert checks_of(result)["slope"].threshold == 0.4
    assert result.passed


def test_criterion_09_liouville():
    result, _ = run_study("liouville", seed=5)
    print_checks(9, result)
    p = STUDIES["liouville"].defaults
    assert p["members"] == 8 and p["rel_tol"] == 1e-3 and p["ratio_min"] == 3.0
    assert result.passed


def test_criterion_10_statistical_energy():
    result, _ = run_study("statistical-energy", seed=5)
    print_checks(10, result)
    c = checks_of(result)
    assert c["degenerate_residual"].threshold == 1e-12
    assert result.passed


def test_criterion_11_vorticity_moments():
    result, _ = run_study("vorticity-moments", seed=5)
    print_checks(11, result)
    p = STUDIES["vorticity-moments"].defaults
    assert p["rel_tol"] == 1e-3 and p["nus"] == [0.0, 1e-2]
    assert len(result.checks) == 8
    assert result.passed


def test_criterion_12_statistical_vanishing_viscosity():
    result, _ = run_study("statistical-vv", seed=5)
    print_checks(12, result)
    names = {c.name for c in result.checks}
    assert {f"{k}_decreasing" for k in ("affine", "saturated", "indicator")} <= names
    assert result.passed


def test_criterion_12_statistical_expanding_domain():
    result, _ = run_study("statistical-expanding", seed=5)
    print_checks(12, result)
    names = {c.name for c in result.checks}
    assert {f"{k}_decreasing" for k in ("affine", "saturated", "indicator")} <= names
    assert result.passed
