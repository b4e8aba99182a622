"""Experiment orchestration and the ``minimax-bench`` command line.

Subcommands (all driven by a JSON spec file):

* ``run``          - trace every iteration of each (algorithm, config,
                     repetition) on one problem and write one CSV per run.
* ``grid``         - step-size/hyperparameter grid search; picks the config
                     with the smallest mean gradient complexity among the
                     convergent ones.
* ``scaling``      - iterations-to-eps on the worst-case game as the coupling
                     condition number grows, with fitted log-log slopes.
* ``spectral``     - stability report (spectral radius) for one combination.
* ``bilinear-opt`` - certified step sizes for bilinear games, including the
                     optimal delta=1 tuning.

Exit codes: 0 success, 2 invalid spec, 3 I/O failure.
``MINIMAX_BENCH_THREADS`` overrides ``--threads``.

Grid search and scaling never trace individual iterations, so they advance
trajectories through the exact per-algorithm iteration matrix in dyadic
blocks (precomputed powers M^(2^j)), stepping down to single applications
around the stopping index.  On linear problems this follows the very same
trajectory as the step functions up to roundoff; traces for ``run`` always
use the literal step loop.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import statistics
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import spectral, theory
from .algorithms import Algo, AlgorithmConfig, run
from .problems import (
    BilinearGame,
    JointPoint,
    Problem,
    ProblemParams,
    nash_equilibrium,
    problem_from_json,
    random_bilinear,
    random_quadratic,
    worst_case_6d,
)

__all__ = [
    "SpecError",
    "LinearRunResult",
    "linear_run",
    "load_problem",
    "expand_grid",
    "cmd_run",
    "cmd_grid",
    "cmd_scaling",
    "cmd_spectral",
    "cmd_bilinear_opt",
    "grid_search",
    "scaling_study",
    "main",
]

DIVERGENCE_LIMIT = 1e150


class SpecError(ValueError):
    """Invalid experiment spec (exit code 2)."""


# ----------------------------------------------------------------------
# fast exact stepping for linear problems


@dataclass(frozen=True)
class LinearRunResult:
    iters: int
    grad_calls: int
    converged: bool
    diverged: bool
    dist_sq: float


def linear_run(
    problem: Problem,
    cfg: AlgorithmConfig,
    z0: JointPoint,
    eps: float,
    max_iters: int,
    block_log2: int = 10,
) -> LinearRunResult:
    """Iterations until ||z_k - z*||^2 <= eps via dyadic matrix powers.

    Returns the first crossing index found along the dyadic refinement,
    which coincides with the literal step loop whenever the distance decays
    (or grows) monotonically across the tested block boundaries.
    """
    if eps <= 0.0:
        raise SpecError("eps must be positive")
    im = spectral.build_matrix(cfg.algo, problem, cfg)
    z_star = nash_equilibrium(problem, z0=z0)
    w = spectral.initial_deviation(im, z0, z_star)
    calls = cfg.calls_per_iter()

    d2 = spectral.state_dist_sq(im, w)
    if d2 <= eps:
        return LinearRunResult(0, 0, True, False, d2)

    # powers[j] = M^(2^j); stop early if entries blow up
    powers = [im.M]
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(block_log2):
            nxt = powers[-1] @ powers[-1]
            if not np.all(np.isfinite(nxt)):
                break
            powers.append(nxt)

    def ok(vec):
        return bool(np.all(np.isfinite(vec)) and np.abs(vec).max() <= DIVERGENCE_LIMIT)

    k = 0
    with np.errstate(over="ignore", invalid="ignore"):
        while k < max_iters:
            j = min(
                len(powers) - 1,
                int(math.log2(max_iters - k)) if max_iters - k > 1 else 0,
            )
            while True:
                w_try = powers[j] @ w
                fine = ok(w_try)
                if fine and spectral.state_dist_sq(im, w_try) > eps:
                    w = w_try
                    k += 1 << j
                    break
                if j == 0:
                    k += 1
                    if not fine:
                        return LinearRunResult(k, calls * k, False, True, float("inf"))
                    return LinearRunResult(
                        k, calls * k, True, False, spectral.state_dist_sq(im, w_try)
                    )
                j -= 1

    return LinearRunResult(
        max_iters, calls * max_iters, False, False, spectral.state_dist_sq(im, w)
    )


# ----------------------------------------------------------------------
# spec parsing


def _require(doc: dict, key: str, ctx: str):
    if key not in doc:
        raise SpecError(f"{ctx}: missing required field {key!r}")
    return doc[key]


def load_problem(doc: dict, rep: int = 0, seed: int | None = None) -> Problem:
    """Problem from an inline document or a generator description.

    Generators draw a fresh instance per repetition by folding the
    repetition index into the seed stream.
    """
    if "kind" in doc:
        return problem_from_json(json.dumps(doc))
    gen = _require(doc, "generator", "problem")
    base = seed if seed is not None else doc.get("seed", 0)
    rep_seed = [int(base), rep] if doc.get("per_repetition", True) else [int(base)]
    if gen == "worst_case_6d":
        return worst_case_6d(ProblemParams(**_require(doc, "params", "problem")))
    if gen == "random_quadratic":
        params = ProblemParams(**_require(doc, "params", "problem"))
        return random_quadratic(
            int(_require(doc, "dx", "problem")),
            int(_require(doc, "dy", "problem")),
            params,
            float(_require(doc, "mu_xy", "problem")),
            rep_seed,
        )
    if gen == "random_bilinear":
        return random_bilinear(
            int(_require(doc, "dx", "problem")),
            int(_require(doc, "dy", "problem")),
            float(_require(doc, "mu_xy", "problem")),
            float(_require(doc, "L_xy", "problem")),
            rep_seed,
        )
    raise SpecError(f"unknown problem generator {gen!r}")


def _initial_point(spec: dict, problem: Problem, rep: int, seed: int) -> JointPoint:
    init = spec.get("init", {})
    if "z0" in init:
        return JointPoint(np.asarray(init["z0"]["x"]), np.asarray(init["z0"]["y"]))
    dx, dy = problem.dims
    scale = float(init.get("scale", 1.0))
    rng = np.random.default_rng([seed, rep, 1])
    return JointPoint(scale * rng.standard_normal(dx), scale * rng.standard_normal(dy))


def _problem_scale(problem: Problem) -> tuple[float, float]:
    # (mu, L) in the grid-rule sense: mu over the strong-convexity constants,
    # L over every Lipschitz constant including the coupling
    if isinstance(problem, BilinearGame):
        return problem.mu_xy, problem.L_xy
    p = problem.params
    return min(p.mu_x, p.mu_y), max(p.L_x, p.L_y, p.L_xy)


def expand_grid(entry: dict, problem: Problem) -> list[tuple[tuple, dict, AlgorithmConfig]]:
    """Expand one algorithm entry into (C-key, fields, config) candidates.

    Scalars pass through; list-valued fields form a cartesian grid.  A
    ``step_rule`` maps grid constants C onto step sizes:

    * ``mu_over_CL2``: alpha = beta = mu / (C L^2)   (divisor constant)
    * ``Cmu_over_L2``: alpha = beta = C mu / L^2     (multiplier constant)
    * ``inv_CL``:      alpha = beta = 1 / (C L)
    * ``C_over_L``:    alpha = beta = C / L
    * ``inv_CL_2``:    alpha = beta = 1/(C0 L), alpha1 = beta1 = 1/(C1 L)

    with mu/L taken from the problem constants.
    """
    algo = Algo(_require(entry, "algo", "algorithm entry"))
    mu, L = _problem_scale(problem)

    axes: dict[str, list] = {}
    for key in ("alpha", "beta", "alpha1", "beta1", "gamma", "delta", "m_x", "m_y"):
        if key in entry:
            v = entry[key]
            axes[key] = list(v) if isinstance(v, (list, tuple)) else [v]

    rule = entry.get("step_rule")
    rule_axes: dict[str, list] = {}
    if rule is not None:
        name = _require(rule, "rule", "step_rule")
        if name in ("mu_over_CL2", "Cmu_over_L2", "inv_CL", "C_over_L"):
            rule_axes["C"] = [float(c) for c in _require(rule, "C", "step_rule")]
        elif name == "inv_CL_2":
            rule_axes["C0"] = [float(c) for c in _require(rule, "C0", "step_rule")]
            rule_axes["C1"] = [float(c) for c in _require(rule, "C1", "step_rule")]
        else:
            raise SpecError(f"unknown step rule {name!r}")

    for key, vals in {**axes, **rule_axes}.items():
        if not vals:
            raise SpecError(f"grid axis {key!r} is empty")

    out = []
    names = sorted(rule_axes) + sorted(axes)
    grids = [rule_axes.get(n, axes.get(n)) for n in names]

    def rec(i, chosen):
        if i == len(names):
            fields = {n: v for n, v in chosen.items() if n in axes}
            ckey = tuple(chosen[n] for n in sorted(rule_axes))
            if rule is not None:
                name = rule["rule"]
                if name == "mu_over_CL2":
                    fields["alpha"] = fields["beta"] = mu / (chosen["C"] * L * L)
                elif name == "Cmu_over_L2":
                    fields["alpha"] = fields["beta"] = chosen["C"] * mu / (L * L)
                elif name == "inv_CL":
                    fields["alpha"] = fields["beta"] = 1.0 / (chosen["C"] * L)
                elif name == "C_over_L":
                    fields["alpha"] = fields["beta"] = chosen["C"] / L
                else:
                    fields["alpha"] = fields["beta"] = 1.0 / (chosen["C0"] * L)
                    fields["alpha1"] = fields["beta1"] = 1.0 / (chosen["C1"] * L)
            try:
                cfg = AlgorithmConfig(algo=algo, **fields)
            except ValueError as e:
                raise SpecError(f"bad config for {algo.value}: {e}") from e
            out.append((ckey, fields, cfg))
            return
        for v in grids[i]:
            chosen[names[i]] = v
            rec(i + 1, chosen)
            del chosen[names[i]]

    rec(0, {})
    return out


def _threads(spec_threads: int | None, cli_threads: int | None) -> int:
    env = os.environ.get("MINIMAX_BENCH_THREADS")
    if env is not None:
        return max(1, int(env))
    if cli_threads is not None:
        return max(1, cli_threads)
    return max(1, spec_threads or 1)


def _master_seed(spec: dict, override: int | None) -> int:
    if override is not None:
        return int(override)
    if "seed" in spec:
        return int(spec["seed"])
    return int(spec.get("problem", {}).get("seed", 0))


# ----------------------------------------------------------------------
# subcommands


def cmd_run(spec: dict, out_dir: str, threads: int = 1, seed: int | None = None) -> list[str]:
    """Trace CSVs, one per (algo, config, repetition).  Returns the paths."""
    eps = float(_require(spec, "eps", "spec"))
    max_iters = int(_require(spec, "max_iters", "spec"))
    reps = int(spec.get("repetitions", 1))
    if eps <= 0 or max_iters <= 0 or reps <= 0:
        raise SpecError("eps, max_iters and repetitions must be positive")
    master = _master_seed(spec, seed)
    prob_doc = _require(spec, "problem", "spec")
    entries = _require(spec, "algorithms", "spec")
    if not entries:
        raise SpecError("algorithms list is empty")

    os.makedirs(out_dir, exist_ok=True)
    jobs = []
    for ai, entry in enumerate(entries):
        for ci, (_, _, cfg) in enumerate(expand_grid(entry, load_problem(prob_doc, 0, master))):
            for rep in range(reps):
                jobs.append((ai, ci, rep, cfg))

    def one(job):
        ai, ci, rep, cfg = job
        problem = load_problem(prob_doc, rep, master)
        z0 = _initial_point(spec, problem, rep, master)
        trace = run(problem, cfg, z0, eps, max_iters)
        path = os.path.join(
            out_dir, f"trace_{ai:02d}_{cfg.algo.value}_{ci:03d}_rep{rep:02d}.csv"
        )
        trace.to_csv(path)
        return path

    n = _threads(spec.get("threads"), threads)
    if n > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            paths = list(pool.map(one, jobs))
    else:
        paths = [one(j) for j in jobs]
    return sorted(paths)


def grid_search(spec: dict, threads: int = 1, seed: int | None = None) -> dict:
    """Best config per algorithm entry by mean gradient complexity.

    A candidate counts as convergent only if every repetition reaches eps
    within the gradient-call budget.  Ties break on smaller grid constant C,
    then lexicographic config order.
    """
    eps = float(_require(spec, "eps", "spec"))
    budget = int(spec.get("budget_calls", 10**6))
    reps = int(spec.get("repetitions", 1))
    master = _master_seed(spec, seed)
    prob_doc = _require(spec, "problem", "spec")
    entries = _require(spec, "algorithms", "spec")
    if not entries:
        raise SpecError("algorithms list is empty")

    results = []
    for entry in entries:
        cands = expand_grid(entry, load_problem(prob_doc, 0, master))

        def one_rep(args):
            cfg, rep = args
            problem = load_problem(prob_doc, rep, master)
            z0 = _initial_point(spec, problem, rep, master)
            cap = budget // cfg.calls_per_iter()
            return linear_run(problem, cfg, z0, eps, cap)

        jobs = [(cfg, rep) for (_, _, cfg) in cands for rep in range(reps)]
        n = _threads(spec.get("threads"), threads)
        if n > 1:
            with ThreadPoolExecutor(max_workers=n) as pool:
                outcomes = list(pool.map(one_rep, jobs))
        else:
            outcomes = [one_rep(j) for j in jobs]

        rows = []
        for i, (ckey, fields, cfg) in enumerate(cands):
            runs = outcomes[i * reps : (i + 1) * reps]
            conv = all(r.converged for r in runs)
            calls = [r.grad_calls for r in runs]
            rows.append(
                {
                    "algo": cfg.algo.value,
                    "C": list(ckey),
                    "config": cfg.as_dict(),
                    "converged": conv,
                    "grad_complexity_mean": statistics.fmean(calls) if conv else None,
                    "grad_complexity_std": (
                        statistics.pstdev(calls) if conv and len(calls) > 1 else 0.0
                    )
                    if conv
                    else None,
                }
            )
        good = [r for r in rows if r["converged"]]
        best = min(
            good,
            key=lambda r: (
                r["grad_complexity_mean"],
                tuple(r["C"]),
                sorted(r["config"].items()),
            ),
            default=None,
        )
        results.append({"algo": Algo(entry["algo"]).value, "best": best, "rows": rows})
    return {"eps": eps, "budget_calls": budget, "repetitions": reps, "results": results}


def cmd_grid(spec: dict, out_dir: str, threads: int = 1, seed: int | None = None) -> str:
    res = grid_search(spec, threads=threads, seed=seed)
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "grid_results.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(res, fh, indent=2)
    return path


def median_loglog_slope(xs, ys) -> float | None:
    """Median slope of the segments joining consecutive points in log-log space."""
    pts = [(x, y) for x, y in zip(xs, ys) if y is not None]
    if len(pts) < 2:
        return None
    slopes = [
        (math.log(y2) - math.log(y1)) / (math.log(x2) - math.log(x1))
        for (x1, y1), (x2, y2) in zip(pts, pts[1:])
    ]
    return statistics.median(slopes)


_SCALING_PRESCRIPTIONS = {
    "SimGDA": lambda p, g, d: theory.sim_prescription(p),
    "AltGDA": lambda p, g, d: theory.alt_prescription(p),
    "AlexGDA": lambda p, g, d: theory.alex_prescription(p, g, d),
}


def scaling_study(
    kappa_xy_list,
    algos=("SimGDA", "AltGDA", "AlexGDA"),
    mu: float = 1.0,
    L: float = 10.0,
    eps: float = 1e-20,
    max_iters: int = 10**9,
    gamma: float = 2.0,
    delta: float = 2.0,
) -> dict:
    """Iterations-to-eps of the worst-case game as kappa_xy grows.

    Each algorithm runs with its theory-prescribed step sizes; diverged
    points are excluded from the slope fit and flagged.
    """
    kappas = [float(k) for k in kappa_xy_list]
    if any(k < 4 for k in kappas):
        raise SpecError("kappa values must be >= 4")
    out = {}
    for name in algos:
        if name not in _SCALING_PRESCRIPTIONS:
            raise SpecError(f"scaling family must be among {sorted(_SCALING_PRESCRIPTIONS)}")
        rows = []
        for k in kappas:
            params = ProblemParams(mu_x=mu, mu_y=mu, L_x=L, L_y=L, L_xy=k * mu)
            problem = worst_case_6d(params)
            pres = _SCALING_PRESCRIPTIONS[name](params, gamma, delta)
            kw = {"gamma": gamma, "delta": delta} if name == "AlexGDA" else {}
            cfg = AlgorithmConfig(algo=Algo(name), alpha=pres.alpha, beta=pres.beta, **kw)
            z0 = JointPoint(np.ones(3), np.ones(3))
            res = linear_run(problem, cfg, z0, eps, max_iters)
            rows.append(
                {
                    "kappa_xy": k,
                    "iters": res.iters if res.converged else None,
                    "converged": res.converged,
                    "diverged": res.diverged,
                }
            )
        slope = median_loglog_slope(
            [r["kappa_xy"] for r in rows], [r["iters"] for r in rows]
        )
        out[name] = {"slope": slope, "rows": rows}
    return out


def cmd_scaling(spec: dict, out_dir: str) -> str:
    kappas = _require(spec, "kappa_xy", "spec")
    res = scaling_study(
        kappas,
        algos=spec.get("algos", ("SimGDA", "AltGDA", "AlexGDA")),
        mu=float(spec.get("mu", 1.0)),
        L=float(spec.get("L", 10.0)),
        eps=float(spec.get("eps", 1e-20)),
        max_iters=int(spec.get("max_iters", 10**9)),
        gamma=float(spec.get("gamma", 2.0)),
        delta=float(spec.get("delta", 2.0)),
    )
    os.makedirs(out_dir, exist_ok=True)
    for name, data in res.items():
        path = os.path.join(out_dir, f"scaling_{name}.csv")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("kappa_xy,iters,converged\n")
            for r in data["rows"]:
                iters = "" if r["iters"] is None else r["iters"]
                fh.write(f"{r['kappa_xy']:.17g},{iters},{str(r['converged']).lower()}\n")
    path = os.path.join(out_dir, "scaling_summary.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(res, fh, indent=2)
    return path


def cmd_spectral(spec: dict, out_dir: str | None) -> str:
    problem = load_problem(_require(spec, "problem", "spec"))
    cfg_doc = dict(_require(spec, "config", "spec"))
    algo = _require(spec, "algo", "spec")
    try:
        cfg = AlgorithmConfig(algo=Algo(algo), **cfg_doc)
    except ValueError as e:
        raise SpecError(f"bad config: {e}") from e
    report = spectral.stability_report(cfg.algo, problem, cfg)
    text = report.to_json()
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, "stability_report.json")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        return path
    print(text)
    return ""


def cmd_bilinear_opt(spec: dict, out_dir: str | None) -> str:
    L = float(_require(spec, "L_xy", "spec"))
    mu = float(_require(spec, "mu_xy", "spec"))
    gamma = spec.get("gamma")
    delta = float(spec.get("delta", 1.0))
    if gamma is None and delta == 1.0:
        ab, g, rate = theory.bilinear_optimal_delta1(L, mu)
        doc = {
            "convergent": True,
            "delta": 1.0,
            "gamma": g,
            "alpha_beta": ab,
            "alpha": math.sqrt(ab),
            "beta": math.sqrt(ab),
            "rate": rate,
        }
    else:
        g = float(gamma if gamma is not None else 1.0)
        if g + delta <= 2.0:
            doc = {"convergent": False, "reason": "no convergent step size"}
        else:
            C = theory.bilinear_cgd(g, delta)
            ab = 1.0 / (C * L * L)
            doc = {
                "convergent": True,
                "gamma": g,
                "delta": delta,
                "C": C,
                "alpha_beta": ab,
                "alpha": math.sqrt(ab),
                "beta": math.sqrt(ab),
                "region_bound": theory.bilinear_step_region(g, delta),
            }
    text = json.dumps(doc)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, "bilinear_opt.json")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        return path
    print(text)
    return ""


# ----------------------------------------------------------------------
# CLI


def _read_spec(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise e
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecError(f"spec is not valid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise SpecError("spec must be a JSON object")
    return doc


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="minimax-bench",
        description="Benchmark harness for saddle-point GDA algorithms.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "grid", "scaling", "spectral", "bilinear-opt"):
        p = sub.add_parser(name)
        p.add_argument("--spec", required=True, help="JSON spec file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        p.add_argument("--threads", type=int, default=None)
    args = parser.parse_args(argv)

    try:
        spec = _read_spec(args.spec)
        out = args.out or spec.get("out", ".")
        if args.command == "run":
            paths = cmd_run(spec, out, threads=args.threads or 1, seed=args.seed)
            print("\n".join(paths))
        elif args.command == "grid":
            print(cmd_grid(spec, out, threads=args.threads or 1, seed=args.seed))
        elif args.command == "scaling":
            print(cmd_scaling(spec, out))
        elif args.command == "spectral":
            cmd_spectral(spec, args.out)
        else:
            cmd_bilinear_opt(spec, args.out)
    except SpecError as e:
        print(f"spec error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"io error: {e}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
