"""Outcome selection principles, model selectors, and reduced model assembly.

A reduced model keeps a per-(state, action) subset of the full model's
outcomes and renormalizes the kept probabilities. The model selector decides
which outcome selection principle applies to each pair; the 0/1 variant
switches between full fidelity near risky states and most-likely-outcome
determinization elsewhere.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from typing import TYPE_CHECKING

from .mdp import Distribution, SspProblem, reachable_states

if TYPE_CHECKING:
    from .risk import RiskProfile


class SelectorError(KeyError):
    """The model selector has no assignment for a required (s, a) pair."""


@dataclass(frozen=True)
class OutcomeSelectionPrinciple:
    """A rule choosing which outcomes of (s, a) survive into the reduced model.

    Kinds: "most_likely" keeps the single highest-probability outcome,
    "greedy_k" keeps the k highest, "full" keeps everything. Probability
    ties break toward the lowest successor id.
    """

    kind: str
    k: int = 1

    def __post_init__(self):
        if self.kind not in ("most_likely", "greedy_k", "full"):
            raise ValueError(f"unknown outcome selection kind {self.kind!r}")
        if self.kind == "greedy_k" and self.k < 1:
            raise ValueError("greedy_k needs k >= 1")

    @property
    def deterministic(self) -> bool:
        return self.kind == "most_likely" or (self.kind == "greedy_k" and self.k == 1)


MOST_LIKELY = OutcomeSelectionPrinciple("most_likely")
FULL_MODEL = OutcomeSelectionPrinciple("full")
M02 = OutcomeSelectionPrinciple("greedy_k", 2)


def select_outcomes(
    principle: OutcomeSelectionPrinciple, full: Distribution
) -> Distribution:
    """Apply one outcome selection principle to a full distribution.

    Kept probabilities are divided by the kept mass, so they stay
    proportional to the originals.
    """
    if principle.kind == "full":
        return full
    k = 1 if principle.kind == "most_likely" else principle.k
    if k >= len(full):
        return full
    kept = sorted(full, key=lambda e: (-e[1], e[0]))[:k]
    mass = sum(p for _, p in kept)
    return tuple(sorted((s, p / mass) for s, p in kept))


class ModelSelector:
    """Maps every applicable (state, action) pair to a selection principle."""

    def principle(self, s: int, a: int) -> OutcomeSelectionPrinciple:
        raise NotImplementedError

    @property
    def deterministic(self) -> bool:
        """True when every assignment is guaranteed to keep a single outcome."""
        return False

    def summary(self, problem: SspProblem) -> str:
        """Per-principle assignment counts over all applicable reachable pairs."""
        counts: dict[str, int] = {}
        for s in reachable_states(problem):
            if problem.is_goal(s):
                continue
            for a in problem.actions(s):
                p = self.principle(s, a)
                label = p.kind if p.kind != "greedy_k" else f"greedy_k({p.k})"
                counts[label] = counts.get(label, 0) + 1
        lines = [f"{label} {count}" for label, count in sorted(counts.items())]
        return "\n".join(lines)


class UniformSelector(ModelSelector):
    """The classical single-principle reduction (e.g. MLOD or M02 everywhere)."""

    def __init__(self, principle: OutcomeSelectionPrinciple):
        self._principle = principle

    def principle(self, s: int, a: int) -> OutcomeSelectionPrinciple:
        return self._principle

    @property
    def deterministic(self) -> bool:
        return self._principle.deterministic


class TableSelector(ModelSelector):
    """Explicit per-pair assignment; missing pairs are configuration errors."""

    def __init__(self, assignment: Mapping[tuple[int, int], OutcomeSelectionPrinciple]):
        self._assignment = dict(assignment)

    def principle(self, s: int, a: int) -> OutcomeSelectionPrinciple:
        try:
            return self._assignment[(s, a)]
        except KeyError:
            raise SelectorError(
                f"selector has no principle for pair (s={s}, a={a})"
            ) from None


class ZeroOneSelector(ModelSelector):
    """The 0/1 RM selector: full model near risk, determinization elsewhere.

    A pair gets the full model when the state's estimated reachability to
    risk meets the threshold, or when any of the pair's full-model outcomes
    is itself a risky state (the one-step guard covering transitions that
    lead directly into risk).
    """

    def __init__(self, risk_profile: "RiskProfile", threshold: float):
        if not 0.0 <= threshold <= 1.0:
            raise ValueError(f"threshold {threshold} outside [0, 1]")
        self.risk_profile = risk_profile
        self.threshold = threshold

    def principle(self, s: int, a: int) -> OutcomeSelectionPrinciple:
        if self.risk_profile.reach(s) >= self.threshold:
            return FULL_MODEL
        base = self.risk_profile.problem
        predicate = self.risk_profile.predicate
        if any(predicate(s2) for s2, _ in base.transition(s, a)):
            return FULL_MODEL
        return MOST_LIKELY


def make_01rm_selector(
    risk_profile: "RiskProfile", threshold: float = 0.25
) -> ZeroOneSelector:
    return ZeroOneSelector(risk_profile, threshold)


class ReducedModel(SspProblem):
    """The base problem with its transition function rewritten per selector.

    States, actions, costs, start, and goals are shared with the base;
    reduced distributions are memoized lazily per pair (the memo fill is
    idempotent, so concurrent readers are safe).
    """

    def __init__(self, base: SspProblem, selector: ModelSelector, name: str = ""):
        self.base = base
        self.selector = selector
        super().__init__(
            n_states=base.n_states,
            n_actions=base.n_actions,
            start=base.start,
            goals=base.goals,
            actions_fn=base.actions,
            transition_fn=self._reduced_transition,
            cost_fn=base.cost,
            name=name or (f"{base.name}/reduced" if base.name else "reduced"),
        )

    def _reduced_transition(self, s: int, a: int):
        return select_outcomes(self.selector.principle(s, a), self.base.transition(s, a))

    @property
    def deterministic(self) -> bool:
        return self.selector.deterministic

    def selector_summary(self) -> str:
        return self.selector.summary(self.base)


def build_reduced_model(
    base: SspProblem, selector: ModelSelector, name: str = ""
) -> ReducedModel:
    return ReducedModel(base, selector, name)
