"""Acceptance criteria 1-9, each checked at its stated tolerance.

Every test prints one ``PASS``/``FAIL`` line (also collected into the
terminal summary). End-to-end criteria use the literal weights
``mu = (1, 0, 1e-3)``; see ``test_scale_matched.py`` for the same scenes
with weights rescaled to the volume size.

Run standalone with ``python tests/test_acceptance.py``.
"""

import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from harness import channel_support_iou, color_scene, first_below, gray_scene, run_scene  # noqa: E402
from lrsdcs import prox, sensing, solver  # noqa: E402
from lrsdcs.framelet import FrameletTransform  # noqa: E402
from lrsdcs.sensing import SensingOperator, build_operator  # noqa: E402
from lrsdcs.solver import ConfigError, SolverConfig, SolverState  # noqa: E402
from lrsdcs.volume import FrameGeometry  # noqa: E402
from oracles import group_shrink_grid, sensing_dense, shrink_grid, svt_oracle  # noqa: E402

LITERAL = SolverConfig(mu1=1.0, mu2=0.0, mu3=1e-3)
_cache = {}


def record(report, number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    print(line)
    report.append(line)
    return ok


def gray_run(gamma=1.6, x_update="exact", max_iter=300, illum=False):
    key = (gamma, x_update, max_iter, illum)
    if key not in _cache:
        cfg = SolverConfig(mu1=1.0, mu2=0.0, mu3=1e-3, gamma=gamma, x_update=x_update,
                           max_iter=max_iter)
        _cache[key] = run_scene(gray_scene(illum), 0.2, cfg)
    return _cache[key]


def truth_gap(run, scene):
    """Model objective at the generating decomposition minus the solver's objective."""
    W = FrameletTransform(scene.volume.geometry)
    bg = scene.background.data
    return solver.objective(bg, scene.volume.data - bg, W, W, LITERAL) - run.dec.final_objective


def end_to_end_ok(run):
    return (run.rank <= 2 and run.psnr >= 30 and run.iou >= 0.8 and run.feas <= 1e-3
            and run.seconds <= 60)


def describe(run):
    return (f"rank(X1)={run.rank} PSNR={run.psnr:.2f} dB mean IoU={run.iou:.3f} "
            f"feasibility={run.feas:.2e} time={run.seconds:.1f}s iterations={run.dec.iterations}")


def test_criterion_1_operator_algebra(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for trial in range(40):
        N = int(rng.integers(2, 4097))
        m = int(rng.integers(1, N))
        op = build_operator(N, m, int(rng.integers(0, 2 ** 63)))
        x = rng.standard_normal(N)
        y = rng.standard_normal(m)
        pw = 1 << int(rng.integers(0, 13))
        v = rng.standard_normal(pw)
        P = op.project(x)
        errs = [
            np.abs(sensing.fwht(sensing.fwht(v)) - v).max(),
            abs(op.measure(x) @ y - x @ op.adjoint(y)) / (np.linalg.norm(x) * np.linalg.norm(y)),
            np.abs(op.measure(op.adjoint(y)) - y).max(),
            np.abs(op.project(P) - P).max(),
        ]
        worst = max(worst, *errs)
    dense = 0.0
    for N in range(2, 65):
        for seed in range(3):
            op = build_operator(N, max(1, N // 3), seed)
            x = rng.standard_normal(N)
            dense = max(dense, np.abs(op.measure(x) - sensing_dense(op) @ x).max())
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and dense <= 1e-12 and elapsed < 5
    assert record(report, 1, ok, f"algebra max err {worst:.1e}, dense oracle max err "
                  f"{dense:.1e}, {elapsed:.2f}s")


def test_criterion_2_tight_frame(report):
    t0 = time.perf_counter()
    t = FrameletTransform(FrameGeometry(64, 64))
    rng = np.random.default_rng(7)
    rec = par = 0.0
    for _ in range(5):
        x = rng.uniform(0, 255, 64 * 64)
        c = t.analyze(x)
        rec = max(rec, np.abs(t.synthesize(c) - x).max() / np.abs(x).max())
        par = max(par, abs(np.sum(c * c) - np.sum(x * x)) / np.sum(x * x))
    elapsed = time.perf_counter() - t0
    ok = rec <= 1e-12 and par <= 1e-12 and elapsed < 1
    assert record(report, 2, ok, f"reconstruction err {rec:.1e}, Parseval err {par:.1e}, "
                  f"{elapsed:.2f}s")


def test_criterion_3_prox_oracles(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    svt_err = 0.0
    for _ in range(100):
        n, J = rng.integers(1, 9, size=2)
        A = rng.standard_normal((n, J)) * rng.uniform(0.1, 3)
        tau = rng.uniform(0, 2)
        svt_err = max(svt_err, np.abs(prox.svt(A, tau) - svt_oracle(A, tau)).max())
    h = 1e-4
    sh_err = gs_err = 0.0
    for _ in range(200):
        x, tau = rng.uniform(-5, 5), rng.uniform(0, 3)
        sh_err = max(sh_err, abs(prox.scalar_shrink(x, tau) - shrink_grid(x, tau, h)))
        v, tau = rng.uniform(-3, 3, 3), rng.uniform(0, 4)
        got = prox.group_shrink(v.reshape(3, 1), tau).ravel()
        gs_err = max(gs_err, np.abs(got - group_shrink_grid(v, tau, h)).max())
    elapsed = time.perf_counter() - t0
    ok = svt_err <= 1e-4 and sh_err <= h and gs_err <= h and elapsed < 30
    assert record(report, 3, ok, f"svt err {svt_err:.1e}, scalar shrink err {sh_err:.1e}, "
                  f"group shrink err {gs_err:.1e} (grid {h}), {elapsed:.2f}s")


def test_criterion_4_x_subproblem(report):
    t0 = time.perf_counter()
    g1 = FrameGeometry(1, 1)
    op1 = SensingOperator(1, 1, 1, 0, np.array([0]), np.array([0]))
    W1 = FrameletTransform(g1)
    cfg1 = SolverConfig(beta1=1.0, beta2=1.0, beta3=1.0, beta4=1.0)
    s1, s2 = solver.solve_x_subproblem(SolverState.zeros(1, 1, 9, 1), cfg1, op1, W1, W1,
                                       np.array([1.0]))
    s1, s2 = float(s1[0, 0]), float(s2[0, 0])
    scalar_ok = abs(s1 - 0.2) <= 1e-12 and abs(s2 - 0.4) <= 1e-12
    rng = np.random.default_rng(4)
    worst = 0.0
    for k in range(50):
        g = FrameGeometry(int(rng.integers(1, 7)), int(rng.integers(2, 7)))
        J = int(rng.integers(1, 6))
        N = g.n * J
        m = int(rng.integers(1, N))
        op = build_operator(N, m, k)
        W = FrameletTransform(g)
        cfg = SolverConfig(*rng.uniform(0, 2, 3), *rng.uniform(0.05, 5, 4))
        r = lambda *s: rng.uniform(0.1, 100) * rng.standard_normal(s)
        st = SolverState(r(g.n, J), r(g.n, J), r(g.n, J), r(9 * g.n, J), r(9 * g.n, J),
                         r(g.n, J), r(9 * g.n, J), r(9 * g.n, J), r(m))
        y = rng.standard_normal(m)
        X1, X2 = solver.solve_x_subproblem(st, cfg, op, W, W, y)
        R1, R2 = solver._rhs(st, cfg, op, W, W, y)
        scale = 1 + np.linalg.norm(R1) + np.linalg.norm(R2)
        worst = max(worst, solver.stationarity_residual(X1, X2, st, cfg, op, W, W, y) / scale)
    elapsed = time.perf_counter() - t0
    ok = scalar_ok and worst <= 1e-9 and elapsed < 5
    assert record(report, 4, ok, f"scalar instance X1={s1:.15g} X2={s2:.15g}; "
                  f"worst scaled residual {worst:.1e}, {elapsed:.2f}s")


def test_criterion_5_grayscale_end_to_end(report):
    run = gray_run()
    ok = end_to_end_ok(run)
    detail = describe(run)
    if not ok:
        detail += f"; objective(truth) - objective(solution) = {truth_gap(run, gray_scene()):.4g}"
    assert record(report, 5, ok, detail)


def test_criterion_6_illumination_change(report):
    run = gray_run(illum=True)
    ok = run.rank <= 3 and run.iou >= 0.7
    assert record(report, 6, ok, describe(run))


def test_criterion_7_color(report):
    run = run_scene(color_scene(), 0.25, LITERAL)
    sup = channel_support_iou(run.dec)
    area = sum(m.area for m in run.masks) / sum(m.area for m in run.truth_masks)
    ok = run.psnr >= 28 and sup >= 0.95
    assert record(report, 7, ok, f"PSNR={run.psnr:.2f} dB, worst pairwise channel support "
                  f"IoU={sup:.3f}, rank(X1)={run.rank}, silhouette area {area:.1f}x the "
                  f"true area")


def test_criterion_8_steepest_variant(report):
    exact = gray_run()
    budget = 3 * exact.dec.iterations
    steep = gray_run(x_update="steepest", max_iter=budget)
    k = first_below(steep.dec.feas_history, 1e-2)
    ok = k is not None and k <= budget
    assert record(report, 8, ok, f"exact variant stopped after {exact.dec.iterations} "
                  f"iterations; steepest variant reached feasibility 1e-2 at iteration {k} "
                  f"(budget {budget})")


def test_criterion_9_parameter_sanity(report):
    runs = {g: gray_run(gamma=g) for g in (1.0, 1.6)}
    rejected = []
    for bad in (dict(gamma=1.619), dict(gamma=1.7), dict(beta1=0.0), dict(beta2=-1.0),
                dict(beta3=0.0), dict(beta4=-0.5)):
        try:
            SolverConfig(**bad)
        except ConfigError:
            rejected.append(True)
        else:
            rejected.append(False)
    ok = all(end_to_end_ok(r) for r in runs.values()) and all(rejected)
    detail = "; ".join(f"gamma={g}: {'ok' if end_to_end_ok(r) else 'criterion 5 fails'} "
                       f"(rank {r.rank}, PSNR {r.psnr:.2f})" for g, r in runs.items())
    detail += f"; invalid configs rejected {sum(rejected)}/{len(rejected)}"
    assert record(report, 9, ok, detail)


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn([])
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
