"""Command-line experiment runner.

Every experiment is described by a JSON config file ({"experiment": kind,
"master_seed": int, ...params}); results land in an output directory as
report.json plus plot-ready CSV files.  Exit codes: 0 all assertions
passed, 1 assertion failures, 2 config errors, 3 numeric/runtime
failures.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from ._rng import stream
from .spaces import SpaceSpec
from .subordinator import (QuadratureError, SubordinatorSpec,
                           sample_stable_oneside, simulate_path)
from .noise import CylindricalWienerSpec, LevyNoiseSpec, char_functional, sample_increments
from .spectral import (SpectralOperator, charfn_oracle, regularity_exponent_bound,
                       sample_convolution)
from .regularity import (CirclePath, blowup_probe, circle_convolution,
                         estimate_holder, fourier_profile, scalar_levy_jumps)
from .burgers import (StepSizeError, check_apriori, solve_modified_burgers,
                      solve_stochastic_burgers, sine_coefficients, weak_residual)

EXPERIMENTS = {}

# static mapping shown by list-experiments
EXPERIMENT_SUMMARY = {
    "subordinator-check": "Laplace-transform identity of exact stable subordinator paths",
    "charfn-test": "characteristic functional of the subordinated cylindrical noise",
    "ou-sample": "OU stochastic convolution sampler vs the quadrature oracle",
    "regularity": "spatial Hoelder exponent of the OU field vs its critical value",
    "blowup": "post-jump norm blow-up of the large-jump part across truncations",
    "circle": "circle convolution of a profile family against a scalar Levy path",
    "burgers": "stochastic Burgers solve with weak-form residual check",
    "bounds": "modified-Burgers a priori energy inequalities on random instances",
}


def _experiment(name):
    def wrap(fn):
        EXPERIMENTS[name] = fn
        return fn
    return wrap


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


@_experiment("subordinator-check")
def _run_subordinator(cfg, out: Path):
    betas = cfg.get("betas", [0.25, 0.5, 0.9])
    rs = cfg.get("r_values", [0.5, 1.0, 2.0])
    n_paths = int(cfg.get("n_paths", 100000))
    seed = int(cfg["master_seed"])
    rows, checks = [], []
    for i, beta in enumerate(betas):
        s = sample_stable_oneside(beta, n_paths, stream(seed, i))
        for r in rs:
            vals = np.exp(-r * s)
            emp, se = float(vals.mean()), float(vals.std() / math.sqrt(n_paths))
            ana = math.exp(-r ** beta)
            ok = abs(emp - ana) <= 4.0 * se
            rows.append([beta, r, emp, se, ana, ok])
            checks.append(ok)
    _write_csv(out / "laplace.csv", ["beta", "r", "empirical", "stderr", "analytic", "pass"], rows)
    return {"cases": len(rows), "failures": int(len(checks) - sum(checks))}, all(checks)


@_experiment("charfn-test")
def _run_charfn(cfg, out: Path):
    N = int(cfg.get("n_modes", 64))
    beta = float(cfg.get("beta", 0.9))
    ts = cfg.get("t_values", [0.5, 1.0])
    n_phi = int(cfg.get("n_phi", 5))
    mc = int(cfg.get("mc_paths", 100000))
    seed = int(cfg["master_seed"])
    spec = LevyNoiseSpec(CylindricalWienerSpec(np.ones(N)), SubordinatorSpec.stable(beta))
    rng = stream(seed, 0)
    phis = rng.standard_normal((n_phi, N)) / math.sqrt(N)
    rows, checks = [], []
    for t in ts:
        grid = np.array([0.0, t])
        proj = np.empty((mc, n_phi))
        for m in range(mc):
            zp = simulate_path(spec.subordinator, t, seed=seed + 13 * m + 1, grid_n=1)
            inc = sample_increments(spec, zp, grid, seed=seed + 13 * m + 2)[0]
            proj[m] = phis @ inc.coefficients
        for i, phi in enumerate(phis):
            vals = np.cos(proj[:, i])
            emp, se = float(vals.mean()), float(vals.std() / math.sqrt(mc))
            ana = char_functional(spec, phi, t)
            ok = abs(emp - ana) <= 4.0 * se
            rows.append([t, i, emp, se, ana, ok])
            checks.append(ok)
    _write_csv(out / "charfn.csv", ["t", "phi_index", "empirical", "stderr", "analytic", "pass"], rows)
    return {"cases": len(rows), "failures": int(len(checks) - sum(checks))}, all(checks)


@_experiment("ou-sample")
def _run_ou(cfg, out: Path):
    N = int(cfg.get("n_modes", 16))
    beta = float(cfg.get("beta", 0.5))
    mc = int(cfg.get("mc_paths", 20000))
    n_pairs = int(cfg.get("n_pairs", 4))
    seed = int(cfg["master_seed"])
    op = SpectralOperator.dirichlet(1, 1.0, N)
    spec = LevyNoiseSpec(CylindricalWienerSpec(np.ones(N)), SubordinatorSpec.stable(beta))
    rng = stream(seed, 0)
    rows, checks = [], []
    for i in range(n_pairs):
        phi = rng.standard_normal(N) / math.sqrt(N)
        t = float(rng.uniform(0.4, 1.2))
        ana = charfn_oracle(op, spec, phi, t)
        vals = np.empty(mc)
        for m in range(mc):
            zp = simulate_path(spec.subordinator, t, cutoff_eps=1e-3,
                               seed=seed + 31 * m + i, method="jumps")
            fs = sample_convolution(op, spec, zp, t, seed=seed + 31 * m + i + 7)
            vals[m] = math.cos(float(fs.coefficients @ phi))
        emp, se = float(vals.mean()), float(vals.std() / math.sqrt(mc))
        ok = abs(emp - ana) <= 4.0 * se
        rows.append([i, t, emp, se, ana, ok])
        checks.append(ok)
    _write_csv(out / "ou_charfn.csv", ["pair", "t", "empirical", "stderr", "analytic", "pass"], rows)
    # one exported field sample
    zp = simulate_path(spec.subordinator, 1.0, seed=seed + 5, method="jumps")
    fs = sample_convolution(op, spec, zp, 1.0, seed=seed + 6)
    fs.to_csv(out / "field_sample.csv", op)
    return {"cases": len(rows), "failures": int(len(checks) - sum(checks))}, all(checks)


@_experiment("regularity")
def _run_regularity(cfg, out: Path):
    N = int(cfg.get("n_modes", 512))
    M = int(cfg.get("grid_M", 2048))
    n_paths = int(cfg.get("n_paths", 10))
    seed = int(cfg["master_seed"])
    op = SpectralOperator.dirichlet(1, 1.0, N)
    rows = []
    results = {}
    for label, sub, method in [("gaussian", SubordinatorSpec.drift_only(1.0), None),
                               ("stable_alpha1", SubordinatorSpec.stable(0.5), "jumps")]:
        spec = LevyNoiseSpec(CylindricalWienerSpec(np.ones(N)), sub)
        ests = []
        for m in range(n_paths):
            zp = simulate_path(sub, 1.0, cutoff_eps=1e-3, seed=seed + 17 * m, method=method)
            fs = sample_convolution(op, spec, zp, 1.0, seed=seed + 17 * m + 9)
            r = estimate_holder(fs, op, M)
            ests.append(r["delta_hat"])
            rows.append([label, m, r["delta_hat"]])
        results[label] = {"mean_delta": float(np.mean(ests)), "per_path": ests}
        results[label]["critical"] = regularity_exponent_bound(
            op, spec, ("holder", 0.0))["critical_exponent"]
    _write_csv(out / "holder.csv", ["case", "path", "delta_hat"], rows)
    ok = (0.2 <= results["gaussian"]["mean_delta"] <= 0.8
          and results["stable_alpha1"]["mean_delta"] > results["gaussian"]["mean_delta"])
    return results, ok


@_experiment("blowup")
def _run_blowup(cfg, out: Path):
    Nmax = int(cfg.get("n_modes", 4096))
    truncs = cfg.get("truncations", [2 ** k for k in range(6, 13)])
    seed = int(cfg["master_seed"])
    threshold = float(cfg.get("threshold", 0.05))
    op = SpectralOperator.dirichlet(1, 1.0, Nmax)
    spec = LevyNoiseSpec(CylindricalWienerSpec(np.ones(Nmax)), SubordinatorSpec.stable(0.5))
    j = np.arange(1.0, Nmax + 1)
    F = SpaceSpec(2.0, j, "F")
    U = SpaceSpec(2.0, 1.0 / j, "U")
    rep = blowup_probe(op, spec, F, truncs, seed=seed, threshold=threshold, u_space=U)
    if rep.get("conclusive"):
        _write_csv(out / "blowup.csv", ["N", "sup_F", "u_norm"],
                   list(zip(rep["truncations"], rep["sup_F"], rep["u_norm_of_mark"])))
        ok = rep["blowup_detected"]
    else:
        ok = False
    return rep, ok


@_experiment("circle")
def _run_circle(cfg, out: Path):
    beta = float(cfg.get("beta", 0.75))
    thetas = cfg.get("thetas", [0.0, 0.5, 1.0, 2.0])
    grids = cfg.get("grids", [128, 256, 512, 1024])
    seed = int(cfg["master_seed"])
    times, incs = scalar_levy_jumps(SubordinatorSpec.stable(beta), seed=seed)
    rows = []
    for th in thetas:
        prof = fourier_profile(th, 512, 4096, seed=seed + 1)
        cp = CirclePath(profile=prof, jump_times=times, jump_increments=incs)
        for M in grids:
            sup = float(np.abs(circle_convolution(cp, M)).max())
            rows.append([th, M, sup])
    _write_csv(out / "circle.csv", ["theta", "grid_M", "sup"], rows)
    return {"rows": len(rows)}, True


@_experiment("burgers")
def _run_burgers(cfg, out: Path):
    n = int(cfg.get("n_modes", 255))
    dt = float(cfg.get("dt", 1e-4))
    T = float(cfg.get("T", 0.2))
    theta = float(cfg.get("theta", 0.25))
    w_scale = float(cfg.get("weight_scale", 5.0))
    tol = float(cfg.get("residual_tol", 1e-3))
    seed = int(cfg["master_seed"])
    k = np.arange(1, n + 1)
    w = w_scale * (k * math.pi) ** theta
    noise = LevyNoiseSpec(CylindricalWienerSpec(w), SubordinatorSpec.stable(0.75))
    u0 = np.zeros(n); u0[0] = float(cfg.get("u0_amplitude", 0.2))
    f = np.zeros(n); f[1] = float(cfg.get("forcing_amplitude", 0.1))
    res = solve_stochastic_burgers(u0, noise, f, T, dt, n, seed=seed)
    residuals = [weak_residual(res, f, kk) for kk in range(1, 6)]
    _write_csv(out / "burgers_residuals.csv", ["test_mode", "residual"],
               list(enumerate(residuals, start=1)))
    _write_csv(out / "burgers_final.csv", ["mode", "u_coefficient"],
               list(enumerate(res["u_coeffs"][-1], start=1)))
    ok = max(abs(r) for r in residuals) < tol
    return {"certificate": res["certificate"],
            "max_residual": max(abs(r) for r in residuals)}, ok


@_experiment("bounds")
def _run_bounds(cfg, out: Path):
    n = int(cfg.get("n_modes", 63))
    n_instances = int(cfg.get("n_instances", 20))
    dt = float(cfg.get("dt", 1e-3))
    T = float(cfg.get("T", 0.5))
    seed = int(cfg["master_seed"])
    rng = stream(seed)
    rows, all_ok = [], True
    for i in range(n_instances):
        v0 = np.zeros(n)
        v0[rng.integers(0, 4)] = rng.uniform(-0.3, 0.3)
        zc = np.zeros(n); zc[rng.integers(0, 4)] = rng.uniform(-0.3, 0.3)
        gc = np.zeros(n); gc[rng.integers(0, 4)] = rng.uniform(-0.3, 0.3)
        traj = solve_modified_burgers(v0, lambda t: zc, lambda t: gc, T, dt, n)
        rep = check_apriori(traj)
        all_ok &= rep["all_pass"]
        for name, b in rep["bounds"].items():
            rows.append([i, name, b["lhs"], b["rhs"], b["pass"]])
    _write_csv(out / "bounds.csv", ["instance", "bound", "lhs", "rhs", "pass"], rows)
    return {"instances": n_instances, "all_pass": bool(all_ok)}, bool(all_ok)


def run(config: dict, out_dir: str) -> int:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    kind = config.get("experiment")
    if kind not in EXPERIMENTS:
        print(f"error: unknown experiment {kind!r}; choices: {sorted(EXPERIMENTS)}",
              file=sys.stderr)
        return 2
    if "master_seed" not in config:
        print("error: config is missing required field 'master_seed'", file=sys.stderr)
        return 2
    t0 = time.time()
    try:
        summary, passed = EXPERIMENTS[kind](config, out)
    except (StepSizeError, QuadratureError, FloatingPointError, RuntimeError) as exc:
        report = {"experiment": kind, "config": config, "status": "numeric-failure",
                  "error": str(exc)}
        (out / "report.json").write_text(json.dumps(report, indent=2, default=str))
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    report = {"experiment": kind, "config": config,
              "status": "pass" if passed else "fail",
              "elapsed_s": round(time.time() - t0, 3), "summary": summary}
    (out / "report.json").write_text(json.dumps(report, indent=2, default=str))
    print(f"{kind}: {report['status']} ({report['elapsed_s']}s)")
    return 0 if passed else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="levyfield",
                                     description="experiment runner for the subordinated-noise library")
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run an experiment from a JSON config")
    runp.add_argument("--config", required=True)
    runp.add_argument("--seed", type=int, default=None, help="override master_seed")
    runp.add_argument("--threads", type=int, default=1,
                      help="worker hint (experiments are deterministic regardless)")
    runp.add_argument("--out", default="out")
    sub.add_parser("list-experiments", help="show the experiment table")
    args = parser.parse_args(argv)

    if args.command == "list-experiments":
        width = max(map(len, EXPERIMENT_SUMMARY))
        for name, desc in EXPERIMENT_SUMMARY.items():
            print(f"{name:<{width}}  {desc}")
        return 0

    try:
        config = json.loads(Path(args.config).read_text())
        if not isinstance(config, dict):
            raise ValueError("top-level config must be a JSON object")
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        config["master_seed"] = args.seed
    return run(config, args.out)


if __name__ == "__main__":
    sys.exit(main())
