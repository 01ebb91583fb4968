"""Plan-execute-replan simulation over the true model.

Policies are computed on a reduced model and executed against the base
model's real outcome distributions. Whenever the current state has no
policy action the agent replans on the same reduced model from that state;
replanning in a risky state counts as a negative side effect.
"""

from __future__ import annotations

import time
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .mdp import DeadEndError, SspProblem, ValueTable
from .reduction import ModelSelector, ReducedModel, build_reduced_model
from .risk import RiskPredicate
from .solvers import (
    EnumerationCapError,
    NonconvergenceError,
    Solution,
    SolverConfig,
    compute_hmin,
    solve_deterministic,
    solve_lao_star,
    solve_value_iteration,
)


@dataclass
class SimConfig:
    epsilon: float = 1e-3
    step_cap: int | None = None  # default 10 x reachable |S| of the base model
    solver_max_iterations: int = 100_000
    enumeration_cap: int = 200_000
    jobs: int = 1

    def solver_config(self, heuristic=None) -> SolverConfig:
        return SolverConfig(
            epsilon=self.epsilon,
            max_iterations=self.solver_max_iterations,
            heuristic=heuristic,
            enumeration_cap=self.enumeration_cap,
        )


@dataclass
class TrialStats:
    total_cost: float = 0.0
    steps: int = 0
    replans: int = 0
    nse_hits: int = 0
    reached_goal: bool = False
    plan_time: float = 0.0
    replan_time: float = 0.0
    seed: int = 0


@dataclass
class ModelResult:
    """Aggregates over all trials of one named reduced model."""

    name: str
    trials: list[TrialStats] = field(default_factory=list)
    failed: bool = False
    failure: str = ""
    selector_summary: str = ""

    @property
    def mean_nse(self) -> float:
        return float(np.mean([t.nse_hits for t in self.trials])) if self.trials else 0.0

    @property
    def mean_cost(self) -> float:
        return float(np.mean([t.total_cost for t in self.trials])) if self.trials else 0.0

    @property
    def mean_replans(self) -> float:
        return float(np.mean([t.replans for t in self.trials])) if self.trials else 0.0

    @property
    def mean_time(self) -> float:
        if not self.trials:
            return 0.0
        return float(np.mean([t.plan_time + t.replan_time for t in self.trials]))

    @property
    def goal_trials(self) -> int:
        return sum(1 for t in self.trials if t.reached_goal)

    def pct_cost_increase(self, optimal: float) -> float:
        return 100.0 * (self.mean_cost - optimal) / optimal

    def pct_time_savings(self, t_full: float) -> float:
        return 100.0 * (t_full - self.mean_time) / t_full


@dataclass
class ExperimentReport:
    results: list[ModelResult]
    optimal_value: float
    t_full: float
    trials: int
    seed: int


def _solve_reduced(
    reduced: ReducedModel,
    start: int,
    config: SolverConfig,
    values: ValueTable | None = None,
) -> Solution:
    """Solve the reduced model from one state, falling back gracefully.

    Deterministic reductions go to A*; everything else (and any A* dead end
    caused by a goal-blocking determinization) goes to LAO*. Nonconvergence
    on improper reductions yields the best greedy policy found, which is all
    the executor needs: the true model supplies the missing stochasticity.
    """
    if reduced.deterministic:
        try:
            return solve_deterministic(reduced, start, config.heuristic)
        except DeadEndError:
            pass
    try:
        return solve_lao_star(reduced, start, config, values=values)
    except NonconvergenceError as exc:
        return exc.solution


def run_trial(
    base: SspProblem,
    reduced: ReducedModel,
    predicate: RiskPredicate,
    config: SimConfig | None = None,
    seed: int = 0,
    initial: Solution | None = None,
    heuristic: Callable[[int], float] | None = None,
    step_cap: int | None = None,
) -> TrialStats:
    """One planning-and-execution trial of the reduced model on the base.

    `initial` may carry a precomputed solve of the reduced model from s0
    (its solve_time is charged as the trial's plan time); replanning keeps
    the trial's own value table warm across re-solves.
    """
    config = config or SimConfig()
    solver_cfg = config.solver_config(heuristic)
    cap = step_cap if step_cap is not None else config.step_cap
    if cap is None:
        cap = 10 * base.n_states
    rng = np.random.default_rng(seed)
    stats = TrialStats(seed=seed)

    if initial is None:
        t0 = time.perf_counter()
        initial = _solve_reduced(reduced, base.start, solver_cfg)
        stats.plan_time = time.perf_counter() - t0
    else:
        stats.plan_time = initial.solve_time
    policy = dict(initial.policy)
    values = initial.values.copy()

    s = base.start
    while stats.steps < cap:
        if base.is_goal(s):
            stats.reached_goal = True
            break
        a = policy.get(s)
        if a is None:
            stats.replans += 1
            if predicate(s):
                stats.nse_hits += 1
            t0 = time.perf_counter()
            solution = _solve_reduced(reduced, s, solver_cfg, values=values)
            stats.replan_time += time.perf_counter() - t0
            policy.update(solution.policy)
            a = policy.get(s)
            if a is None:
                raise DeadEndError(f"replanning produced no action for state {s}")
        stats.total_cost += base.cost(s, a)
        dist = base.transition(s, a)
        u = rng.random()
        acc = 0.0
        s2 = dist[-1][0]
        for cand, p in dist:
            acc += p
            if u < acc:
                s2 = cand
                break
        s = s2
        stats.steps += 1
    else:
        stats.reached_goal = base.is_goal(s)

    assert stats.nse_hits <= stats.replans
    return stats


def optimal_start_value(base: SspProblem, config: SimConfig | None = None) -> float:
    """V*(s0) of the full model: VI on desk-scale instances, converged LAO*
    (with the h_min heuristic) above the enumeration cap."""
    config = config or SimConfig()
    try:
        return solve_value_iteration(base, config.solver_config()).start_value
    except EnumerationCapError:
        hmin = compute_hmin(base, base.start, config.solver_config())
        return solve_lao_star(base, config=config.solver_config(hmin)).start_value


def run_experiment(
    base: SspProblem,
    models: Sequence[tuple[str, ModelSelector]],
    predicate: RiskPredicate,
    trials: int = 100,
    seed: int = 0,
    config: SimConfig | None = None,
    heuristic: Callable[[int], float] | None = None,
) -> ExperimentReport:
    """Run the full evaluation protocol over a list of named model selectors.

    Per model: build the reduced model, solve it once from s0 (the shared
    initial plan), run `trials` independently-seeded execution trials, and
    aggregate. The full-model baseline solve time and V*(s0) anchor the
    %-time-savings and %-cost-increase columns.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    config = config or SimConfig()
    if heuristic is None:
        heuristic = compute_hmin(base, base.start, config.solver_config())
    solver_cfg = config.solver_config(heuristic)

    optimal = optimal_start_value(base, config)
    t0 = time.perf_counter()
    solve_lao_star(base, config=solver_cfg)
    t_full = time.perf_counter() - t0

    results: list[ModelResult] = []
    for name, selector in models:
        result = ModelResult(name=name)
        try:
            reduced = build_reduced_model(base, selector, name=name)
            plan_t0 = time.perf_counter()
            initial = _solve_reduced(reduced, base.start, solver_cfg)
            initial.solve_time = time.perf_counter() - plan_t0
        except Exception as exc:  # noqa: BLE001 - failed models must not stop others
            result.failed = True
            result.failure = f"{type(exc).__name__}: {exc}"
            results.append(result)
            continue

        def one_trial(trial: int, _reduced=reduced, _initial=initial) -> TrialStats:
            # Common random numbers: trial i draws the same outcome stream
            # under every model, pairing the per-model comparisons.
            trial_seed = np.random.SeedSequence([seed, trial]).generate_state(1)[0]
            return run_trial(
                base,
                _reduced,
                predicate,
                config,
                seed=int(trial_seed),
                initial=_initial,
                heuristic=heuristic,
            )

        if config.jobs > 1:
            with ThreadPoolExecutor(max_workers=config.jobs) as pool:
                result.trials = list(pool.map(one_trial, range(trials)))
        else:
            result.trials = [one_trial(i) for i in range(trials)]
        results.append(result)
    return ExperimentReport(results, optimal, t_full, trials, seed)
