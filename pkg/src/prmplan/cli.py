"""Command-line front end: solve instances and run reduced-model experiments.

Two subcommands: `solve` computes a policy for one model on one instance
(optionally cross-checking LAO* against the value iteration oracle), and
`experiment` runs the full multi-model evaluation protocol and writes
per-trial and aggregate reports.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .reduction import (
    FULL_MODEL,
    M02,
    MOST_LIKELY,
    ModelSelector,
    UniformSelector,
    build_reduced_model,
    make_01rm_selector,
)
from .risk import estimate_risk_profile
from .simulator import SimConfig, _solve_reduced, run_experiment
from .solvers import SolverConfig, compute_hmin, solve_value_iteration

MODEL_NAMES = ("full", "mlod", "m02", "rm01")

TRIAL_FIELDS = (
    "model",
    "trial",
    "seed",
    "cost",
    "steps",
    "replans",
    "nse_hits",
    "reached_goal",
    "plan_ms",
    "replan_ms",
)

AGGREGATE_FIELDS = (
    "model",
    "avg_nse",
    "mean_cost",
    "pct_cost_increase",
    "pct_time_savings",
    "goal_trials",
)


def _add_instance_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--domain",
        required=True,
        choices=("racetrack", "sailing", "ev"),
        help="benchmark domain",
    )
    sub.add_argument(
        "--instance",
        required=True,
        help="instance name (builtin) or path to a map/scenario file",
    )
    sub.add_argument("--epsilon", type=float, default=1e-3, help="solver residual bound")
    sub.add_argument(
        "--threshold",
        type=float,
        default=0.25,
        help="risk reachability threshold for the rm01 selector",
    )
    sub.add_argument(
        "--samples", type=int, default=30, help="random walks per state (rm01)"
    )
    sub.add_argument("--depth", type=int, default=4, help="random walk depth (rm01)")
    sub.add_argument("--seed", type=int, default=0, help="master random seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prmplan",
        description="SSP planning with portfolios of reduced models",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    solve = subs.add_parser("solve", help="solve one model on one instance")
    _add_instance_args(solve)
    solve.add_argument(
        "--model",
        default="full",
        choices=MODEL_NAMES,
        help="which model to solve",
    )
    solve.add_argument(
        "--oracle",
        action="store_true",
        help="cross-check LAO* against full-sweep value iteration",
    )
    solve.add_argument("--out", help="write the policy as 'state action' lines")

    experiment = subs.add_parser(
        "experiment", help="run the multi-model evaluation protocol"
    )
    _add_instance_args(experiment)
    experiment.add_argument(
        "--models",
        default="full,mlod,m02,rm01",
        help="comma-separated model names (full, mlod, m02, rm01)",
    )
    experiment.add_argument("--trials", type=int, default=100, help="trials per model")
    experiment.add_argument("--jobs", type=int, default=1, help="concurrent trial runners")
    experiment.add_argument(
        "--out", default="results", help="output directory for report files"
    )
    return parser


def _make_selector(name: str, problem, predicate, args) -> ModelSelector:
    if name == "full":
        return UniformSelector(FULL_MODEL)
    if name == "mlod":
        return UniformSelector(MOST_LIKELY)
    if name == "m02":
        return UniformSelector(M02)
    if name == "rm01":
        profile = estimate_risk_profile(
            problem, predicate, samples=args.samples, depth=args.depth, seed=args.seed
        )
        return make_01rm_selector(profile, args.threshold)
    raise ValueError(f"unknown model {name!r}; choose from {', '.join(MODEL_NAMES)}")


def cmd_solve(args) -> int:
    from .domains import build_instance

    problem, predicate = build_instance(args.domain, args.instance, seed=args.seed)
    selector = _make_selector(args.model, problem, predicate, args)
    reduced = build_reduced_model(problem, selector, name=args.model)
    heuristic = compute_hmin(
        problem, problem.start, SolverConfig(epsilon=args.epsilon)
    )
    config = SolverConfig(epsilon=args.epsilon, heuristic=heuristic)
    solution = _solve_reduced(reduced, problem.start, config)
    print(f"instance   {problem.name} ({problem.n_states} states)")
    print(f"model      {args.model}")
    print(f"V(s0)      {solution.start_value:.6f}")
    print(f"expanded   {solution.expanded_states}")
    print(f"solve_time {solution.solve_time:.3f}s")
    if args.oracle:
        oracle = solve_value_iteration(reduced, SolverConfig(epsilon=args.epsilon))
        gap = abs(solution.start_value - oracle.start_value)
        print(f"oracle     VI V(s0) {oracle.start_value:.6f}  |gap| {gap:.2e}")
        if gap > 2 * args.epsilon:
            print("oracle     DISAGREEMENT beyond 2*epsilon", file=sys.stderr)
            return 1
    if args.out:
        with open(args.out, "w") as fh:
            for s in sorted(solution.policy):
                fh.write(f"{s} {solution.policy[s]}\n")
        print(f"policy     written to {args.out}")
    return 0


def _format_table(rows: list[dict], optimal: float, t_full: float) -> str:
    headers = ("model", "avg NSE", "% cost increase", "% time savings")
    cells = [headers]
    for row in rows:
        cells.append(
            (
                row["model"],
                f"{row['avg_nse']:.2f}",
                f"{row['pct_cost_increase']:.2f}",
                f"{row['pct_time_savings']:.2f}",
            )
        )
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = [
        f"optimal cost V*(s0) = {optimal:.4f}; full-model solve time = {t_full:.3f}s"
    ]
    for i, row in enumerate(cells):
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def cmd_experiment(args) -> int:
    from .domains import build_instance

    names = [n.strip() for n in args.models.split(",") if n.strip()]
    unknown = [n for n in names if n not in MODEL_NAMES]
    if unknown:
        print(f"error: unknown model(s) {', '.join(unknown)}", file=sys.stderr)
        return 2
    problem, predicate = build_instance(args.domain, args.instance, seed=args.seed)
    models = [(n, _make_selector(n, problem, predicate, args)) for n in names]
    config = SimConfig(epsilon=args.epsilon, jobs=args.jobs)
    report = run_experiment(
        problem, models, predicate, trials=args.trials, seed=args.seed, config=config
    )

    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "trials.csv", "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=TRIAL_FIELDS)
            writer.writeheader()
            for result in report.results:
                for i, t in enumerate(result.trials):
                    writer.writerow(
                        {
                            "model": result.name,
                            "trial": i,
                            "seed": t.seed,
                            "cost": f"{t.total_cost:.9g}",
                            "steps": t.steps,
                            "replans": t.replans,
                            "nse_hits": t.nse_hits,
                            "reached_goal": int(t.reached_goal),
                            "plan_ms": f"{1000 * t.plan_time:.3f}",
                            "replan_ms": f"{1000 * t.replan_time:.3f}",
                        }
                    )
        rows = []
        for result in report.results:
            if result.failed:
                print(f"model {result.name} failed: {result.failure}", file=sys.stderr)
                continue
            rows.append(
                {
                    "model": result.name,
                    "avg_nse": result.mean_nse,
                    "mean_cost": result.mean_cost,
                    "pct_cost_increase": result.pct_cost_increase(report.optimal_value),
                    "pct_time_savings": result.pct_time_savings(report.t_full),
                    "goal_trials": result.goal_trials,
                }
            )
        with open(out / "aggregate.csv", "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=AGGREGATE_FIELDS)
            writer.writeheader()
            for row in rows:
                writer.writerow(
                    {
                        "model": row["model"],
                        "avg_nse": f"{row['avg_nse']:.9g}",
                        "mean_cost": f"{row['mean_cost']:.9g}",
                        "pct_cost_increase": f"{row['pct_cost_increase']:.9g}",
                        "pct_time_savings": f"{row['pct_time_savings']:.9g}",
                        "goal_trials": row["goal_trials"],
                    }
                )
        table = _format_table(rows, report.optimal_value, report.t_full)
        (out / "table.txt").write_text(table)
    except OSError as exc:
        print(f"error: cannot write reports to {out}: {exc}", file=sys.stderr)
        return 1
    print(table, end="")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "solve":
            return cmd_solve(args)
        return cmd_experiment(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
