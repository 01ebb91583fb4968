"""Core stochastic shortest path model: problems, values, policies, backups.

States and actions are dense integer ids within one problem instance.
Successor distributions are generated on demand by domain callbacks and
memoized, so large instances never materialize a full transition table.
"""

from __future__ import annotations

import math
from collections import deque
from collections.abc import Callable, Iterable, Mapping

PROB_TOL = 1e-9

Outcome = tuple[int, float]
Distribution = tuple[Outcome, ...]

# Partial policies are plain dicts: states outside the solved envelope are
# simply absent, so policy.get(s) is None exactly when replanning is needed.
Policy = dict[int, int]


class ModelError(ValueError):
    """Malformed problem data: bad distribution, cost sign, or action id."""


class DeadEndError(RuntimeError):
    """A state with no applicable action, or no remaining route to a goal."""


def make_distribution(entries: Iterable[tuple[int, float]]) -> Distribution:
    """Validate a successor distribution and renormalize it exactly.

    Probabilities must be strictly positive, successors distinct, and the
    total mass within PROB_TOL of 1; anything else raises ModelError. The
    result is sorted by successor id with mass rescaled to exactly 1.
    """
    items = sorted(entries)
    if not items:
        raise ModelError("empty outcome distribution")
    total = 0.0
    prev = -1
    for s, p in items:
        if s == prev:
            raise ModelError(f"duplicate successor {s} in distribution")
        if not p > 0.0:
            raise ModelError(f"non-positive probability {p} for successor {s}")
        prev = s
        total += p
    if abs(total - 1.0) > PROB_TOL:
        raise ModelError(f"distribution mass {total!r} not within {PROB_TOL} of 1")
    if total == 1.0:
        return tuple(items)
    return tuple((s, p / total) for s, p in items)


class SspProblem:
    """Explicit-state SSP ⟨states, actions, transition, cost, start, goals⟩.

    Immutable after construction (memo dicts fill idempotently), so one
    instance can back any number of concurrent solves and trials.
    """

    def __init__(
        self,
        n_states: int,
        n_actions: int,
        start: int,
        goals: Iterable[int],
        actions_fn: Callable[[int], Iterable[int]],
        transition_fn: Callable[[int, int], Iterable[tuple[int, float]]],
        cost_fn: Callable[[int, int], float],
        name: str = "",
    ):
        self.n_states = n_states
        self.n_actions = n_actions
        self.start = start
        self.goals = frozenset(goals)
        self.name = name
        self._actions_fn = actions_fn
        self._transition_fn = transition_fn
        self._cost_fn = cost_fn
        self._action_memo: dict[int, tuple[int, ...]] = {}
        self._transition_memo: dict[tuple[int, int], Distribution] = {}

    def is_goal(self, s: int) -> bool:
        return s in self.goals

    def actions(self, s: int) -> tuple[int, ...]:
        acts = self._action_memo.get(s)
        if acts is None:
            acts = tuple(sorted(self._actions_fn(s)))
            self._action_memo[s] = acts
        return acts

    def transition(self, s: int, a: int) -> Distribution:
        key = (s, a)
        dist = self._transition_memo.get(key)
        if dist is None:
            if a not in self.actions(s):
                raise ModelError(f"action {a} not applicable in state {s}")
            try:
                dist = make_distribution(self._transition_fn(s, a))
            except ModelError as exc:
                raise ModelError(f"at (s={s}, a={a}): {exc}") from None
            self._transition_memo[key] = dist
        return dist

    def cost(self, s: int, a: int) -> float:
        return self._cost_fn(s, a)


def tabular_problem(
    transitions: Mapping[tuple[int, int], Iterable[tuple[int, float]]],
    costs: Mapping[tuple[int, int], float],
    start: int,
    goals: Iterable[int],
    n_states: int | None = None,
    n_actions: int | None = None,
    name: str = "",
) -> SspProblem:
    """Build a problem from explicit dicts keyed by (state, action).

    Goal states need no entries: they get a zero-cost self-loop on action 0
    automatically. Mainly for tests and hand-built desk examples.
    """
    goals = frozenset(goals)
    per_state: dict[int, list[int]] = {}
    hi_s, hi_a = start, 0
    for (s, a) in transitions:
        per_state.setdefault(s, []).append(a)
        hi_s = max(hi_s, s)
        hi_a = max(hi_a, a)
    for (entries) in transitions.values():
        for s2, _ in entries:
            hi_s = max(hi_s, s2)
    for g in goals:
        hi_s = max(hi_s, g)

    def actions_fn(s: int) -> list[int]:
        if s in goals:
            return [0]
        return per_state.get(s, [])

    def transition_fn(s: int, a: int) -> list[tuple[int, float]]:
        if s in goals:
            return [(s, 1.0)]
        return list(transitions[(s, a)])

    def cost_fn(s: int, a: int) -> float:
        if s in goals:
            return 0.0
        return costs[(s, a)]

    return SspProblem(
        n_states=n_states if n_states is not None else hi_s + 1,
        n_actions=n_actions if n_actions is not None else hi_a + 1,
        start=start,
        goals=goals,
        actions_fn=actions_fn,
        transition_fn=transition_fn,
        cost_fn=cost_fn,
        name=name,
    )


class ValueTable:
    """Partial value function V(s) with a heuristic fallback for new states."""

    __slots__ = ("_values", "heuristic")

    def __init__(
        self,
        heuristic: Callable[[int], float] | None = None,
        values: Mapping[int, float] | None = None,
    ):
        self._values: dict[int, float] = dict(values) if values else {}
        self.heuristic = heuristic

    def __getitem__(self, s: int) -> float:
        v = self._values.get(s)
        if v is None:
            v = float(self.heuristic(s)) if self.heuristic is not None else 0.0
            self._values[s] = v
        return v

    def __setitem__(self, s: int, v: float) -> None:
        self._values[s] = v

    def __contains__(self, s: int) -> bool:
        return s in self._values

    def __len__(self) -> int:
        return len(self._values)

    def known(self) -> dict[int, float]:
        return dict(self._values)

    def copy(self) -> "ValueTable":
        return ValueTable(self.heuristic, self._values)


def bellman_backup(problem: SspProblem, values: ValueTable, s: int) -> tuple[float, int]:
    """One Bellman backup: min over actions of C(s,a) + E[V(successor)].

    Ties break toward the lowest action id. Raises DeadEndError when the
    state has no applicable action (improper model).
    """
    acts = problem.actions(s)
    if not acts:
        raise DeadEndError(f"state {s} has no applicable action")
    best_q = math.inf
    best_a = acts[0]
    for a in acts:
        q = problem.cost(s, a)
        for s2, p in problem.transition(s, a):
            q += p * values[s2]
        if q < best_q:
            best_q = q
            best_a = a
    return best_q, best_a


def reachable_states(problem: SspProblem, start: int | None = None) -> list[int]:
    """All states reachable from start (default s0), in BFS order."""
    root = problem.start if start is None else start
    seen = {root}
    order = [root]
    queue = deque([root])
    while queue:
        s = queue.popleft()
        if problem.is_goal(s):
            continue
        for a in problem.actions(s):
            for s2, _ in problem.transition(s, a):
                if s2 not in seen:
                    seen.add(s2)
                    order.append(s2)
                    queue.append(s2)
    return order


def validate_problem(problem: SspProblem) -> list[str]:
    """Check model well-formedness; violations are returned, not raised.

    Covers: distribution normalization, absorbing zero-cost goals, positive
    non-goal costs, no dead ends, and properness (a goal is reachable from
    every state reachable from s0).
    """
    violations: list[str] = []
    try:
        states = reachable_states(problem)
    except ModelError as exc:
        return [f"transition error during reachability sweep: {exc}"]

    successors: dict[int, list[int]] = {}
    for s in states:
        acts = problem.actions(s)
        if not acts:
            violations.append(f"dead end: state {s} has no applicable action")
            continue
        succ: list[int] = []
        for a in acts:
            try:
                dist = problem.transition(s, a)
            except ModelError as exc:
                violations.append(f"normalization violation at (s={s}, a={a}): {exc}")
                continue
            succ.extend(s2 for s2, _ in dist)
            c = problem.cost(s, a)
            if problem.is_goal(s):
                if c != 0.0:
                    violations.append(f"goal cost violation: cost({s},{a}) = {c} != 0")
                if dist != ((s, 1.0),):
                    violations.append(f"goal absorption violation at (s={s}, a={a})")
            elif not c > 0.0:
                violations.append(f"cost sign violation: cost({s},{a}) = {c} <= 0")
        successors[s] = succ

    # Properness: reverse reachability from the goals over the forward graph.
    reverse: dict[int, list[int]] = {s: [] for s in states}
    for s, succ in successors.items():
        for s2 in succ:
            if s2 in reverse:
                reverse[s2].append(s)
    can_reach_goal = {s for s in states if problem.is_goal(s)}
    queue = deque(can_reach_goal)
    while queue:
        s = queue.popleft()
        for prev in reverse.get(s, ()):
            if prev not in can_reach_goal:
                can_reach_goal.add(prev)
                queue.append(prev)
    for s in states:
        if s not in can_reach_goal:
            violations.append(f"proper-policy violation: no goal reachable from state {s}")
    return violations
