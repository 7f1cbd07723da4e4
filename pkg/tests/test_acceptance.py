"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``ACCEPTANCE <n> PASS|FAIL`` line (visible even
under output capture) before asserting.
"""
import math
import time

import numpy as np

from frechet_median import geometry as geo
from frechet_median.bounds import (
    ConcentrationSpec,
    F_eval,
    assumption_check,
    basic_bound_radius,
    refined_bound_radius,
)
from frechet_median.geometry import ModelSpace
from frechet_median.harness import (
    consistency_experiment,
    genericity_experiment,
    geometry_kernel_suite,
    hmin_verification_run,
    position_bound_experiment,
    recompute_verdict,
)
from frechet_median.oracle import grid_minimize
from frechet_median.solver import (
    DiscreteMeasure,
    SolverConfig,
    first_order_residual,
    lipschitz_certificate,
    median_solve,
    move_toward_median_check,
)

from conftest import SPACES, random_points

S2, E2, H2 = ModelSpace(1.0), ModelSpace(0.0), ModelSpace(-1.0)

# frozen after the calibration run (seed 0, 5 uniform points on S^2)
CONSISTENCY_GOLDEN = {"16": 1.3329365179888817, "64": 0.7616354712663145, "256": 0.0, "1024": 0.0}


def announce(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\nACCEPTANCE {n:>2} {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def test_criterion_01_F_thin_margin(capsys):
    alpha = 0.51
    rho = 0.99 * math.pi * (1 - 1 / (2 * alpha))
    t = math.pi / 2 - rho
    reps = 1000
    t0 = time.perf_counter()
    for _ in range(reps):
        value = F_eval(alpha, rho, 1.0, t)
    per_call = (time.perf_counter() - t0) / reps
    ok = abs(value - 0.2907) <= 5e-4 and per_call < 1e-3
    announce(capsys, 1, ok, f"F = {value:.6f} (target 0.2907 +- 5e-4), {per_call * 1e6:.1f} us/call")


def test_criterion_02_hmin_oracle(capsys):
    t0 = time.perf_counter()
    rep = hmin_verification_run(500, seed=0, grid=100_000)
    elapsed = time.perf_counter() - t0
    counts = {g: sum(r["geometry"] == g for r in rep.trials) for g in ("sphere", "flat", "hyperbolic")}
    checks = rep.verdict["checks"]
    ok = (rep.passed and checks["max_abs_err"] < 1e-7 and checks["ordering_violations"] == 0
          and all(c == 500 for c in counts.values()) and elapsed < 60)
    announce(capsys, 2, ok, f"max err {checks['max_abs_err']:.2e}, ordering violations "
                            f"{checks['ordering_violations']}, {elapsed:.1f} s")


def _refined_formula(space, alpha, rho):
    q = alpha / math.sqrt(2 * alpha - 1)
    if space.curvature > 0:
        return math.asin(q * math.sin(rho))
    if space.curvature < 0:
        return math.asinh(q * math.sinh(rho))
    return q * rho


def test_criterion_03_position_containment(capsys):
    runs = [(E2, 0.75, 1.0), (S2, 0.75, 0.3), (H2, 0.75, 1.0)]
    t0 = time.perf_counter()
    lines, ok = [], True
    for space, alpha, rho in runs:
        rep = position_bound_experiment(space, ConcentrationSpec(alpha, rho), trials=500, seed=0)
        radius = _refined_formula(space, alpha, rho)
        worst = rep.summary["max_dist_to_center"]
        good = (rep.passed and len(rep.trials) == 500 and worst <= radius + 1e-6
                and recompute_verdict(rep) == rep.verdict)
        ok &= good
        lines.append(f"{space.kind}: {worst:.7f} <= {radius:.7f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 300
    announce(capsys, 3, ok, "; ".join(lines) + f"; {elapsed:.0f} s")


def test_criterion_04_alpha_one(capsys):
    worst_excess, trials = -math.inf, 0
    for k, rho in enumerate((0.1, 0.3, 0.5, 0.75)):
        assert rho < math.pi / 4
        rep = position_bound_experiment(S2, ConcentrationSpec(1.0, rho), trials=50, seed=k)
        trials += len(rep.trials)
        worst_excess = max(worst_excess, rep.summary["max_dist_to_center"] - rho)
    ok = trials == 200 and worst_excess <= 1e-6
    announce(capsys, 4, ok, f"{trials} trials, max dist - rho = {worst_excess:.2e}")


def test_criterion_05_basic_vs_refined(capsys):
    kappas = (-4.0, -1.0, -0.25, 0.0, 0.25, 1.0, 4.0)
    alphas = np.linspace(0.51, 1.0, 25)
    rhos = np.linspace(0.01, 1.0, 20)
    checked, violations, unverified = 0, 0, 0
    for kappa in kappas:
        space = ModelSpace(kappa)
        for a in alphas:
            for r in rhos:
                spec = ConcentrationSpec(float(a), float(r))
                if not assumption_check(space, spec):
                    continue
                rep = refined_bound_radius(space, spec)
                if rep.refined_radius is None:
                    unverified += 1
                    continue
                checked += 1
                R = rep.refined_radius
                equal = abs(R - r) <= 1e-12
                good = (R <= basic_bound_radius(spec) and R >= r - 1e-12
                        and equal == (a == 1.0) and R < rep.r_star / 2)
                violations += not good
    ok = checked >= 2500 and violations == 0
    announce(capsys, 5, ok, f"{checked} grid points checked, {violations} violations "
                            f"({unverified} without a certified refined radius)")


def _instances(n_total, seed):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n_total):
        space = SPACES[i % 3]
        n = int(rng.integers(3, 7))
        pts = random_points(space, n, rng)
        out.append(DiscreteMeasure(space, pts, rng.dirichlet(np.ones(n))))
    return out


def test_criterion_06_stationarity_and_optimality(capsys):
    worst_res, worst_gap, worst_slack, failures = 0.0, 0.0, math.inf, 0
    for idx, mu in enumerate(_instances(150, 606)):
        res = median_solve(mu)
        residual = first_order_residual(mu, res.median)
        _, f_oracle = grid_minimize(mu, step=0.02)
        gap = res.cost - f_oracle
        cert, slack = lipschitz_certificate(mu, res.median, trials=200, seed=idx, f_star=f_oracle)
        worst_res = max(worst_res, residual)
        worst_gap = max(worst_gap, abs(gap))
        worst_slack = min(worst_slack, slack)
        failures += not (res.converged and residual < 1e-8 and abs(gap) <= 1e-6 and cert)
    ok = failures == 0 and worst_slack >= -1e-8
    announce(capsys, 6, ok, f"150 instances: max residual {worst_res:.1e}, max |cost - oracle| "
                            f"{worst_gap:.1e}, min Lipschitz slack {worst_slack:.2e}")


def test_criterion_07_move_toward_median(capsys):
    bad_moves, worst_diam = 0, 0.0
    cfg = SolverConfig(multistarts=32)
    for mu in _instances(50, 707):
        space = mu.space
        m = median_solve(mu).median
        d = geo.dist(space, m, mu.points)
        order = np.argsort(-d)
        k = int(order[0])
        for t in (0.25, 0.5, 0.75):
            bad_moves += not move_toward_median_check(mu, m, k, t, cost_tol=1e-8)
        i, j = int(order[0]), int(order[1])
        pts = mu.points.copy()
        pts[i] = geo.geodesic_point(space, pts[i], m, 0.5)
        pts[j] = geo.geodesic_point(space, pts[j], m, 0.3)
        moved = median_solve(DiscreteMeasure(space, pts, mu.weights), cfg)
        worst_diam = max(worst_diam, moved.cluster_diameter)
    ok = bad_moves == 0 and worst_diam < 1e-7
    announce(capsys, 7, ok, f"150 single moves, {bad_moves} failures; "
                            f"two-point moves max cluster diameter {worst_diam:.1e}")


def test_criterion_08_genericity(capsys):
    rep = genericity_experiment(S2, 5, trials=200, seed=0)
    frac = rep.summary["unique_fraction"]
    pair = next(r for r in rep.trials if r["kind"] == "symmetric_pair")
    n_generic = rep.verdict["checks"]["n_generic"]
    ok = rep.passed and frac >= 0.99 and not pair["unique"] and n_generic >= 190
    announce(capsys, 8, ok, f"unique fraction {frac:.3f} over {n_generic} generic samples; "
                            f"symmetric pair cluster diameter {pair['cluster_diameter']:.3f}")


def test_criterion_09_consistency(capsys):
    mu = DiscreteMeasure.uniform(S2, geo.sample_uniform(S2, 5, 0))
    t0 = time.perf_counter()
    rep = consistency_experiment(mu, (16, 64, 256, 1024), trials=50, seed=0)
    elapsed = time.perf_counter() - t0
    med = rep.summary["median_dist_by_n"]
    golden = all(abs(med[n] - v) <= 1e-6 * max(1.0, v) for n, v in CONSISTENCY_GOLDEN.items())
    ok = rep.passed and med["1024"] < 0.05 and golden and elapsed < 600
    announce(capsys, 9, ok, f"median dist by n {med}, matches golden: {golden}, {elapsed:.0f} s")


def test_criterion_10_geometry_kernels(capsys):
    t0 = time.perf_counter()
    rep = geometry_kernel_suite(1000, seed=0)
    elapsed = time.perf_counter() - t0
    ok = rep.passed and elapsed < 30
    checks = rep.verdict["checks"]
    ratio = max(c["max"] / rep.verdict["tolerances"][name] for name, c in checks.items())
    announce(capsys, 10, ok, f"{len(checks)} kernel checks on 1000 cases each, worst residual at "
                             f"{ratio:.1e} of its tolerance, {elapsed:.1f} s")
