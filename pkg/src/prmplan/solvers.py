"""Solvers: value iteration oracle, lazy h_min heuristic, LAO*, and A*."""

from __future__ import annotations

import heapq
import math
import time
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .mdp import (
    DeadEndError,
    Policy,
    SspProblem,
    ValueTable,
    bellman_backup,
    reachable_states,
)


class EnumerationCapError(RuntimeError):
    """The instance is too large for full-sweep enumeration."""


class NonconvergenceError(RuntimeError):
    """Solver hit its iteration budget; carries the best solution so far."""

    def __init__(self, message: str, solution: "Solution"):
        super().__init__(message)
        self.solution = solution


@dataclass
class SolverConfig:
    epsilon: float = 1e-3
    max_iterations: int = 100_000
    heuristic: Callable[[int], float] | None = None
    enumeration_cap: int = 200_000


@dataclass
class Solution:
    policy: Policy
    values: ValueTable
    expanded_states: int
    solve_time: float
    start: int
    converged: bool = True

    @property
    def start_value(self) -> float:
        return self.values[self.start]


def solve_value_iteration(
    problem: SspProblem,
    config: SolverConfig | None = None,
    start: int | None = None,
) -> Solution:
    """Full-sweep value iteration over all states reachable from start.

    The desk-scale oracle: vectorized sweeps over sparse per-action
    transition matrices until the sup-norm residual drops below epsilon.
    Refuses instances above the enumeration cap.
    """
    config = config or SolverConfig()
    root = problem.start if start is None else start
    t0 = time.perf_counter()
    states = reachable_states(problem, root)
    n = len(states)
    if n > config.enumeration_cap:
        raise EnumerationCapError(
            f"{n} reachable states exceed enumeration cap {config.enumeration_cap}"
        )
    index = {s: i for i, s in enumerate(states)}
    n_a = problem.n_actions
    cost = np.full((n, n_a), np.inf)
    rows: list[list[int]] = [[] for _ in range(n_a)]
    cols: list[list[int]] = [[] for _ in range(n_a)]
    data: list[list[float]] = [[] for _ in range(n_a)]
    goal_rows = []
    for i, s in enumerate(states):
        if problem.is_goal(s):
            goal_rows.append(i)
            continue
        acts = problem.actions(s)
        if not acts:
            raise DeadEndError(f"state {s} has no applicable action")
        for a in acts:
            cost[i, a] = problem.cost(s, a)
            for s2, p in problem.transition(s, a):
                rows[a].append(i)
                cols[a].append(index[s2])
                data[a].append(p)
    goal_rows = np.array(goal_rows, dtype=int)
    mats = [
        sparse.csr_matrix((data[a], (rows[a], cols[a])), shape=(n, n))
        for a in range(n_a)
    ]

    v = np.zeros(n)
    q = cost.copy()
    converged = False
    for _ in range(config.max_iterations):
        q = cost + np.stack([mats[a] @ v for a in range(n_a)], axis=1)
        v_new = np.min(q, axis=1)
        if goal_rows.size:
            v_new[goal_rows] = 0.0
        residual = float(np.max(np.abs(v_new - v)))
        v = v_new
        if residual < config.epsilon:
            converged = True
            break

    values = ValueTable(config.heuristic, {s: float(v[i]) for i, s in enumerate(states)})
    policy: Policy = {}
    for i, s in enumerate(states):
        if problem.is_goal(s):
            continue
        policy[s] = int(np.argmin(q[i]))
    solution = Solution(policy, values, n, time.perf_counter() - t0, root, converged)
    if not converged:
        raise NonconvergenceError(
            f"value iteration did not converge in {config.max_iterations} sweeps",
            solution,
        )
    return solution


class HminHeuristic:
    """Admissible h_min lower bound, learned lazily by labeled real-time trials.

    Values live in the all-outcomes-min relaxation
    ``h(s) = min_a [C(s,a) + min_{s' in support(s,a)} h(s')]``; a queried
    state is driven by greedy trials (with backups along the way) until it
    is labeled solved, i.e. its residual is below epsilon and its greedy
    successor is labeled. Initial values of 0 keep every intermediate
    estimate a lower bound on the relaxed (hence the true) value.
    """

    def __init__(self, problem: SspProblem, config: SolverConfig | None = None):
        config = config or SolverConfig()
        self.problem = problem
        self.epsilon = config.epsilon
        self.max_trials = config.max_iterations
        self.step_cap = 4 * problem.n_states + 100
        self._h: dict[int, float] = {}
        self._labeled: set[int] = set()

    def __call__(self, s: int) -> float:
        return self.value(s)

    def value(self, s: int) -> float:
        if self.problem.is_goal(s):
            return 0.0
        trials = 0
        while s not in self._labeled:
            self._trial(s)
            trials += 1
            if trials > self.max_trials:
                raise NonconvergenceError(
                    f"h_min trials from state {s} exceeded {self.max_trials}",
                    Solution({}, ValueTable(values=self._h), len(self._h), 0.0, s, False),
                )
        return self._h.get(s, 0.0)

    def _backup(self, s: int) -> tuple[float, int]:
        problem = self.problem
        best_q = math.inf
        best_succ = s
        for a in problem.actions(s):
            succ_min = math.inf
            succ_best = s
            for s2, _ in problem.transition(s, a):
                h2 = 0.0 if problem.is_goal(s2) else self._h.get(s2, 0.0)
                if h2 < succ_min:
                    succ_min = h2
                    succ_best = s2
            q = problem.cost(s, a) + succ_min
            if q < best_q:
                best_q = q
                best_succ = succ_best
        if best_q == math.inf:
            raise DeadEndError(f"state {s} has no applicable action")
        return best_q, best_succ

    def _solved(self, s: int) -> bool:
        return s in self._labeled or self.problem.is_goal(s)

    def _trial(self, root: int) -> None:
        path: list[int] = []
        s = root
        steps = 0
        while not self._solved(s) and steps < self.step_cap:
            value, succ = self._backup(s)
            self._h[s] = value
            path.append(s)
            s = succ
            steps += 1
        for s in reversed(path):
            value, succ = self._backup(s)
            residual = value - self._h.get(s, 0.0)
            self._h[s] = value
            if residual < self.epsilon and self._solved(succ):
                self._labeled.add(s)
            else:
                break


def compute_hmin(
    problem: SspProblem,
    start: int | None = None,
    config: SolverConfig | None = None,
) -> HminHeuristic:
    """Labeled-LRTA* h_min heuristic, converged lazily per queried state."""
    h = HminHeuristic(problem, config)
    if start is not None:
        h.value(start)
    return h


def solve_lao_star(
    problem: SspProblem,
    start: int | None = None,
    config: SolverConfig | None = None,
    values: ValueTable | None = None,
) -> Solution:
    """LAO*: expand the best partial solution graph, backing up until the
    greedy envelope is tip-free and Bellman-residual-converged.

    An existing ValueTable may be passed in for warm-started replanning; it
    is updated in place. Improper inputs surface as NonconvergenceError
    carrying the best greedy policy found (its values stop improving once
    every greedy envelope without a goal has been expanded).
    """
    config = config or SolverConfig()
    root = problem.start if start is None else start
    t0 = time.perf_counter()
    v = values if values is not None else ValueTable(config.heuristic)
    expanded: set[int] = set()
    greedy: dict[int, int] = {}

    def build_graph() -> tuple[list[int], list[int]]:
        order: list[int] = []
        tips: list[int] = []
        seen = {root}
        stack = [root]
        while stack:
            s = stack.pop()
            if problem.is_goal(s):
                continue
            if s not in expanded:
                tips.append(s)
                continue
            order.append(s)
            a = greedy.get(s)
            if a is None:
                val, a = bellman_backup(problem, v, s)
                v[s] = val
                greedy[s] = a
            for s2, _ in problem.transition(s, a):
                if s2 not in seen:
                    seen.add(s2)
                    stack.append(s2)
        return order, tips

    def dp(order: list[int], sweep_cap: int) -> float:
        residual = math.inf
        for _ in range(sweep_cap):
            residual = 0.0
            for s in reversed(order):
                val, a = bellman_backup(problem, v, s)
                diff = abs(val - v[s])
                if diff > residual:
                    residual = diff
                v[s] = val
                greedy[s] = a
            if residual < config.epsilon:
                break
        return residual

    def snapshot(order: list[int], converged: bool) -> Solution:
        policy = {s: greedy[s] for s in order if s in greedy}
        return Solution(
            policy, v, len(expanded), time.perf_counter() - t0, root, converged
        )

    stall = 0
    prev_residual = math.inf
    for _ in range(config.max_iterations):
        order, tips = build_graph()
        if tips:
            stall = 0
            prev_residual = math.inf
            for s in tips:
                expanded.add(s)
                v[s]  # pin the heuristic value before the first backup
            dp(order + tips, sweep_cap=5)
            continue
        residual = dp(order, sweep_cap=200)
        before = set(order)
        order, tips = build_graph()
        # Converged only when the residual bound applies to the final graph:
        # dp may reroute greedy actions into states it never backed up.
        if not tips and set(order) == before:
            if residual < config.epsilon:
                return snapshot(order, converged=True)
            # Stable tip-free envelope that will not converge: values only
            # keep growing when no goal is reachable along the greedy graph.
            stall = stall + 1 if residual >= 0.5 * prev_residual else 0
            prev_residual = residual
            if stall >= 5:
                raise NonconvergenceError(
                    "LAO* stalled: greedy envelope does not converge "
                    "(no proper policy in this model from the start state)",
                    snapshot(order, converged=False),
                )
        else:
            stall = 0
            prev_residual = math.inf
    order, _ = build_graph()
    raise NonconvergenceError(
        f"LAO* exceeded {config.max_iterations} iterations", snapshot(order, False)
    )


def solve_deterministic(
    problem: SspProblem,
    start: int | None = None,
    heuristic: Callable[[int], float] | None = None,
) -> Solution:
    """A* over a deterministic model (every distribution has one outcome).

    Returns a min-cost path policy; values along the path hold the
    remaining cost to the goal. Raises DeadEndError when no goal is
    reachable and ModelError (via the transition check) on stochastic input.
    """
    from .mdp import ModelError

    root = problem.start if start is None else start
    t0 = time.perf_counter()
    h = heuristic or (lambda s: 0.0)
    g_cost: dict[int, float] = {root: 0.0}
    parent: dict[int, tuple[int, int]] = {}
    closed: set[int] = set()
    counter = 0
    frontier: list[tuple[float, int, int]] = [(float(h(root)), counter, root)]
    goal = None
    while frontier:
        _, _, s = heapq.heappop(frontier)
        if s in closed:
            continue
        closed.add(s)
        if problem.is_goal(s):
            goal = s
            break
        for a in problem.actions(s):
            dist = problem.transition(s, a)
            if len(dist) != 1:
                raise ModelError(
                    f"stochastic outcome at (s={s}, a={a}); A* needs a determinized model"
                )
            s2 = dist[0][0]
            new_g = g_cost[s] + problem.cost(s, a)
            if s2 not in g_cost or new_g < g_cost[s2]:
                g_cost[s2] = new_g
                parent[s2] = (s, a)
                counter += 1
                heapq.heappush(frontier, (new_g + float(h(s2)), counter, s2))
    if goal is None:
        raise DeadEndError(f"no goal reachable from state {root} in determinized model")

    policy: Policy = {}
    values = ValueTable(heuristic)
    total = g_cost[goal]
    s = goal
    values[s] = 0.0
    while s != root:
        prev, a = parent[s]
        policy[prev] = a
        values[prev] = total - g_cost[prev]
        s = prev
    return Solution(policy, values, len(closed), time.perf_counter() - t0, root, True)
