"""The eight acceptance criteria, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -v``; the lines appear in the
"acceptance criteria" summary section.  ``python tests/test_acceptance.py``
prints them directly.
"""

import time

import numpy as np
import pytest

import property_checks as pc
from acceptance_log import record
from robust_split.certify import check_slater, core_error_bound, estimate_c_hat, validate_core_bound
from robust_split.geometry.linalg import sur
from robust_split.instances import (ex3_1_infeasible, ex3_2_tau1, ex3_3_sqrt2, ex4_1_sur_fail, ex4_2_polyhedral,
                                    nominal_examples, run_nominal)
from robust_split.oracle import empirical_tau, grid_solv_distances, solv_distance, solv_distances
from robust_split.residual import residual_values
from robust_split.solver import SolveConfig, solve_auto
from robust_split.uncertainty import birkhoff_map, in_birkhoff_omega, sur_inf_estimate

SQRT2 = np.sqrt(2.0)


def _grid(count=100, radius=5.0):
    # cell centres, so no point sits on an axis
    t = -radius + (np.arange(count) + 0.5) * (2 * radius / count)
    return np.stack(np.meshgrid(t, t), -1).reshape(-1, 2)


def test_criterion_1_sqrt2_example():
    t0 = time.perf_counter()
    P = ex3_3_sqrt2()
    X = _grid()
    p = residual_values(P, X)[0]
    pos = np.all(X > 0, axis=1)
    mixed = (X[:, 0] > 0) != (X[:, 1] > 0)
    closed = np.where(pos, np.linalg.norm(X, axis=1), np.where(mixed, X.max(axis=1), 0.0))
    err_closed = float(np.abs(p - closed).max())
    cert = estimate_c_hat(P, samples=20_000, seed=0)
    dist, _ = solv_distances(P, X)
    excess_bound = float(np.max(dist - SQRT2 * p))
    secs = time.perf_counter() - t0
    ok = (len(X) == 10_000 and err_closed <= 1e-9 and cert.c_hat >= 1 / SQRT2 - 1e-6
          and excess_bound <= 1e-9 and secs < 5)
    record(1, ok, "2x2 Birkhoff with the nonpositive orthant",
           f"closed-form error {err_closed:.1e} on {len(X)} points, c_hat {cert.c_hat:.6f} "
           f"(R3 samples {cert.sample_meta['region_counts'].get('R3', 0)}), "
           f"max dist - sqrt2 p {excess_bound:.1e}, {secs:.2f}s")
    assert ok


def test_criterion_2_cancellation_example():
    t0 = time.perf_counter()
    P = ex3_1_infeasible()
    cert = estimate_c_hat(P, samples=20_000, seed=0)
    rep = solve_auto(P, SolveConfig(seed=0))
    d = solv_distance(P, [0.5])
    secs = time.perf_counter() - t0
    argmin = cert.sample_meta["argmin_point"][0]
    ok = (cert.c_hat <= 1e-9 and 0 < argmin < 1 and rep.verdict == "residual-floor"
          and 0.95 <= rep.p_floor <= 1.05 and d == np.inf and secs < 5)
    record(2, ok, "infeasible instance with cancelling subgradients",
           f"c_hat {cert.c_hat:.1e} attained at x = {argmin:.4f}, verdict {rep.verdict}, "
           f"p_floor {rep.p_floor:.6f}, Solv empty {d == np.inf}, {secs:.2f}s")
    assert ok


def test_criterion_3_line_example():
    """The reference claims c_hat = 0 here; every R2 subgradient is -1, so the sampled value is 1."""
    t0 = time.perf_counter()
    P = ex3_2_tau1()
    cert = estimate_c_hat(P, samples=20_000, seed=0)
    tau = empirical_tau(P, samples=10_000, box_radius=10.0, seed=0)
    secs = time.perf_counter() - t0
    r2 = cert.sample_meta["region_counts"].get("R2", 0)
    ok = cert.c_hat <= 1e-9 and tau.sup_ratio <= 1 + 1e-6 and r2 > 0 and secs < 5
    record(3, ok, "error bound with tau = 1 on the line",
           f"c_hat {cert.c_hat:.6f} over {r2} R2 samples (required <= 1e-9), "
           f"sup dist/p {tau.sup_ratio:.6f} over {tau.samples} samples, {secs:.2f}s")
    assert ok


def test_criterion_4_polyhedral_example():
    t0 = time.perf_counter()
    P = ex4_2_polyhedral()
    w = np.arange(0.0, 1.0 + 5e-4, 1e-3)
    sur_min = min(sur(P.U.combine([a, 1 - a])) for a in w)
    sl = check_slater(P)
    worst = np.inf
    core_ok = False
    if sl.found:
        cert = core_error_bound(P, sl)
        X = np.random.default_rng(0).uniform(-10, 10, (10_000, 2))
        worst, core_ok = validate_core_bound(P, cert, X)
    # the exact oracle is checked against the brute-force grid before its ratios are trusted
    probe = np.random.default_rng(1).uniform(-4, 4, (20, 2))
    step = 10.0 / 500
    oracle_gap = float(np.abs(solv_distances(P, probe)[0] - grid_solv_distances(P, probe, 10.0, step)).max())
    tau = empirical_tau(P, samples=10_000, box_radius=10.0, seed=0)
    secs = time.perf_counter() - t0
    ok = (sur_min >= 0.5 and sl.found and sl.eta > 0 and core_ok and oracle_gap <= 2 * step
          and tau.sup_ratio <= SQRT2 + 1e-6 and secs < 10)
    record(4, ok, "polyhedral instance with a Slater direction",
           f"min sur {sur_min:.6f}, eta {sl.eta:.6f}, worst core ratio {worst:.6f} on 10000 samples, "
           f"oracle vs grid {oracle_gap:.1e}, sup dist/p {tau.sup_ratio:.6f}, {secs:.2f}s")
    assert ok


def test_criterion_5_covering_bound_vanishes():
    val, lam = sur_inf_estimate(ex4_1_sur_fail().U, grid_density=1000, refine_iters=50, seed=0)
    ok = val <= 1e-3 and np.allclose(lam, [0.5, 0.5], atol=1e-2)
    record(5, ok, "covering bound over the 2x2 Birkhoff pair",
           f"value {val:.2e} at weights {np.round(lam, 6).tolist()}")
    assert ok


def test_criterion_6_birkhoff_map():
    rng = np.random.default_rng(0)
    sums, mins = [], []
    while len(sums) < 100:
        w = rng.uniform(0, 1, 4)
        if not in_birkhoff_omega(w):
            continue
        B = birkhoff_map(w)
        sums.append(max(np.abs(B.sum(0) - 1).max(), np.abs(B.sum(1) - 1).max()))
        mins.append(B.min())
    ok = max(sums) <= 1e-12 and min(mins) >= -1e-12
    record(6, ok, "doubly stochastic images of the 3x3 parameterisation",
           f"100 samples, max sum error {max(sums):.1e}, min entry {min(mins):.3f}")
    assert ok


def test_criterion_7_property_suites():
    t0 = time.perf_counter()
    outs = pc.all_outcomes()
    secs = time.perf_counter() - t0
    failed = [o for o in outs if not o.ok]
    ok = not failed and secs < 60
    detail = f"{len(outs)} suites, {secs:.1f}s"
    if failed:
        detail += "; failing: " + "; ".join(str(o) for o in failed)
    record(7, ok, "property suites", detail)
    assert ok


def test_criterion_8_nominal_checks():
    got = {}
    for name in nominal_examples():
        cert, expected = run_nominal(name)
        got[name] = (cert.details["overall"], expected)
    ok = all(a == b for a, b in got.values())
    record(8, ok, "nominal cone conditions",
           ", ".join(f"{k} -> {a} (expected {b})" for k, (a, b) in got.items()))
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
