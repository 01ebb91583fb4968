"""Risk predicates, NSE sets, random-walk sampling, and reachability estimates."""

import io
import math

import pytest

from prmplan import (
    FULL_MODEL,
    MOST_LIKELY,
    RiskPredicate,
    UniformSelector,
    build_reduced_model,
    estimate_risk_profile,
    exact_risk_reachability,
    nse_set,
    sample_walks,
    tabular_problem,
)


class TestNseSet:
    def test_dropped_risky_outcome_detected(self, risky_fork):
        problem, predicate = risky_fork
        reduced = build_reduced_model(problem, UniformSelector(MOST_LIKELY))
        assert nse_set(problem, reduced, predicate) == {2}

    def test_full_model_has_no_nse(self, risky_fork):
        problem, predicate = risky_fork
        reduced = build_reduced_model(problem, UniformSelector(FULL_MODEL))
        assert nse_set(problem, reduced, predicate) == set()

    def test_non_risky_drop_ignored(self, risky_fork):
        problem, _ = risky_fork
        benign = RiskPredicate(evaluate=lambda s: False)
        reduced = build_reduced_model(problem, UniformSelector(MOST_LIKELY))
        assert nse_set(problem, reduced, benign) == set()

    def test_unreachable_states_excluded(self):
        # State 5 drops a risky outcome but is unreachable from s0.
        problem = tabular_problem(
            transitions={
                (0, 0): [(1, 1.0)],
                (5, 0): [(1, 0.9), (6, 0.1)],
                (6, 0): [(1, 1.0)],
            },
            costs={(0, 0): 1.0, (5, 0): 1.0, (6, 0): 1.0},
            start=0,
            goals={1},
        )
        predicate = RiskPredicate(evaluate=lambda s: s == 6)
        reduced = build_reduced_model(problem, UniformSelector(MOST_LIKELY))
        assert nse_set(problem, reduced, predicate) == set()


class TestSampleWalks:
    def test_depth_one_transitions(self, self_loop):
        walks = sample_walks(self_loop, 0, n=50, depth=1, seed=1)
        assert all(len(w) == 2 for w in walks)

    def test_deterministic_chain_identical(self, chain3):
        walks = sample_walks(chain3, 0, n=10, depth=5, seed=3)
        assert all(w == [0, 1, 2] for w in walks)

    def test_stops_at_goal(self, chain3):
        walks = sample_walks(chain3, 2, n=5, depth=9, seed=0)
        assert all(w == [2] for w in walks)

    def test_seed_determinism(self, self_loop):
        a = sample_walks(self_loop, 0, n=100, depth=4, seed=7)
        b = sample_walks(self_loop, 0, n=100, depth=4, seed=7)
        assert a == b

    def test_binomial_concentration(self, self_loop):
        walks = sample_walks(self_loop, 0, n=10_000, depth=1, seed=0)
        frac = sum(1 for w in walks if w[-1] == 1) / len(walks)
        assert frac == pytest.approx(0.5, abs=0.02)

    def test_argument_validation(self, chain3):
        with pytest.raises(ValueError):
            sample_walks(chain3, 0, n=0, depth=1, seed=0)
        with pytest.raises(ValueError):
            sample_walks(chain3, 0, n=1, depth=0, seed=0)


class TestRiskProfile:
    def test_risky_state_shortcut(self, risky_fork):
        problem, predicate = risky_fork
        profile = estimate_risk_profile(problem, predicate, seed=0)
        assert profile.reach(2) == 1.0

    def test_unreachable_risk_is_zero(self, chain3):
        predicate = RiskPredicate(evaluate=lambda s: False)
        profile = estimate_risk_profile(chain3, predicate, seed=0)
        assert profile.reach(0) == 0.0

    def test_equiprobable_branch_estimate(self):
        # One action from s0 splits evenly between a risky and a safe state;
        # exact depth-limited hit probability is 0.5.
        problem = tabular_problem(
            transitions={
                (0, 0): [(1, 0.5), (2, 0.5)],
                (1, 0): [(3, 1.0)],
                (2, 0): [(3, 1.0)],
            },
            costs={(0, 0): 1.0, (1, 0): 1.0, (2, 0): 1.0},
            start=0,
            goals={3},
        )
        predicate = RiskPredicate(evaluate=lambda s: s == 2)
        profile = estimate_risk_profile(problem, predicate, samples=10_000, depth=2, seed=0)
        assert profile.reach(0) == pytest.approx(0.5, abs=0.02)

    def test_values_are_sample_frequencies(self, risky_fork):
        problem, predicate = risky_fork
        profile = estimate_risk_profile(problem, predicate, samples=30, seed=0)
        value = profile.reach(0)
        assert math.isclose(value * 30, round(value * 30), abs_tol=1e-9)

    def test_seed_determinism(self, risky_fork):
        problem, predicate = risky_fork
        a = estimate_risk_profile(problem, predicate, seed=5)
        b = estimate_risk_profile(problem, predicate, seed=5)
        a.materialize()
        b.materialize()
        assert a._reach == b._reach

    def test_query_order_independent(self, risky_fork):
        problem, predicate = risky_fork
        a = estimate_risk_profile(problem, predicate, seed=5)
        b = estimate_risk_profile(problem, predicate, seed=5)
        a.reach(0)
        a.reach(1)
        b.reach(1)
        b.reach(0)
        assert a._reach == b._reach

    def test_dump_format(self, risky_fork):
        problem, predicate = risky_fork
        profile = estimate_risk_profile(problem, predicate, seed=0)
        profile.reach(2)
        profile.reach(0)
        out = io.StringIO()
        profile.dump(out)
        lines = out.getvalue().splitlines()
        assert lines[0].startswith("0 ")
        assert lines[1] == "2 1.000000"
        for line in lines:
            sid, value = line.split()
            assert 0.0 <= float(value) <= 1.0


class TestExactReachability:
    def test_matches_hand_computation(self):
        # From s0: uniform over two actions; a0 hits risk with prob 0.5 in
        # one step, a1 never does. Exact depth-2 hit = 0.5 * 0.5 = 0.25.
        problem = tabular_problem(
            transitions={
                (0, 0): [(1, 0.5), (2, 0.5)],
                (0, 1): [(3, 1.0)],
                (1, 0): [(3, 1.0)],
                (2, 0): [(3, 1.0)],
            },
            costs={(0, 0): 1.0, (0, 1): 1.0, (1, 0): 1.0, (2, 0): 1.0},
            start=0,
            goals={3},
        )
        predicate = RiskPredicate(evaluate=lambda s: s == 2)
        exact = exact_risk_reachability(problem, predicate, depth=2)
        assert exact[0] == pytest.approx(0.25)
        assert exact[2] == 1.0
        assert exact[3] == 0.0

    def test_estimator_converges_to_exact(self, small_sailing):
        problem, predicate = small_sailing
        exact = exact_risk_reachability(problem, predicate, depth=4)
        profile = estimate_risk_profile(problem, predicate, samples=2000, depth=4, seed=0)
        states = list(exact)[::11]
        within = sum(
            1
            for s in states
            if abs(profile.reach(s) - exact[s])
            <= 3 * math.sqrt(exact[s] * (1 - exact[s]) / 2000) + 1e-12
        )
        # 3-sigma binomial bound: allow the occasional outlier state.
        assert within >= 0.95 * len(states)
