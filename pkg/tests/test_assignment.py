import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import brute_force_matching, random_objective, small_instance
from redundant_assignment.assignment import (
    AssignmentEdge as E,
    AssignmentSet,
    MatroidSpec,
    SampledObjective,
    TaskState,
    aggregate_min,
    baseline_random,
    baseline_repeated_hungarian,
    best_aposteriori,
    brute_force_optimal,
    eligible_set,
    greedy_redundant_assignment,
    hungarian,
    initial_assignment,
    is_independent,
    ltr_mean,
    marginal_decrease,
    objective_value,
    realized_pair_costs,
)
from redundant_assignment.costs import JointEdgeCostModel, ObservedCosts, draw_observed, sample_edge_costs
from redundant_assignment.graph import GraphGenConfig, generate_random_graph, select_placement
from redundant_assignment.paths import build_path_table


def obj(per_pair):
    return SampledObjective.from_arrays(per_pair)


class _Table:
    """Minimal stand-in exposing what the strategies read from a path table."""

    def __init__(self, objective):
        self.objective = objective
        self.n_robots = objective.n_robots
        self.m_goals = objective.m_goals

    def n_paths(self, i, j):
        return int(self.objective.n_paths[i, j])

    def all_edges(self):
        return self.objective.all_edges()


class TestHungarian:
    def test_two_by_two(self):
        c = np.array([[1.0, 2.0], [2.0, 1.0]])
        assert brute_force_matching(c) == 2.0
        assert hungarian(c) == [(0, 0), (1, 1)]

    def test_single(self):
        assert hungarian([[5.0]]) == [(0, 0)]

    def test_symmetric_tie_prefers_low_columns(self):
        assert hungarian([[1.0, 1.0], [1.0, 1.0]]) == [(0, 0), (1, 1)]

    def test_rejects_more_rows_than_columns(self):
        with pytest.raises(ValueError):
            hungarian(np.ones((3, 2)))

    def test_rejects_negative_or_infinite(self):
        with pytest.raises(ValueError):
            hungarian([[-1.0, 2.0]])
        with pytest.raises(ValueError):
            hungarian([[np.inf, 2.0]])

    @pytest.mark.parametrize("seed", range(20))
    def test_rectangular_matches_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        m = int(rng.integers(1, 4))
        c = rng.uniform(0, 10, size=(m, int(rng.integers(m, 6))))
        pairs = hungarian(c)
        assert sorted(r for r, _ in pairs) == list(range(m))
        assert len({col for _, col in pairs}) == m
        assert sum(c[r, col] for r, col in pairs) == pytest.approx(brute_force_matching(c))


class TestInitialAssignment:
    def test_forced(self):
        o = obj([[[[4.0, 6.0, 11.0]]]])
        a = initial_assignment(None, o)
        assert a.initial == (E(0, 0, 0),)
        assert objective_value(a, o) == 7.0

    def test_argmin_robot(self):
        o = obj([[[[10.0, 10.0]]], [[[8.0, 8.0]]]])
        assert initial_assignment(None, o).initial == (E(1, 0, 0),)

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_enumeration(self, seed):
        rng = np.random.default_rng(seed)
        o = obj([[[rng.uniform(0, 30, 8) for _ in range(2)] for _ in range(2)] for _ in range(3)])
        means = ltr_mean(o.samples)
        best_total, best = np.inf, None
        for robots in itertools.permutations(range(3), 2):
            for ks in itertools.product(range(2), repeat=2):
                total = sum(means[r, j, k] for j, (r, k) in enumerate(zip(robots, ks)))
                if total < best_total:
                    best_total, best = total, tuple(E(r, j, k) for j, (r, k) in enumerate(zip(robots, ks)))
        a = initial_assignment(None, o)
        assert a.initial == best
        a.validate(2)


class TestMatroid:
    init = (E(0, 0, 0),)

    def test_empty_is_independent(self):
        assert is_independent([], MatroidSpec(2), self.init)

    def test_budget_violation(self):
        assert not is_independent([E(1, 0, 0), E(2, 0, 0), E(3, 0, 0)], MatroidSpec(2), self.init)

    def test_robot_reuse(self):
        assert not is_independent([E(1, 0, 0), E(1, 1, 1)], MatroidSpec(3), self.init)
        assert not is_independent([E(1, 0, 0), E(1, 0, 1)], MatroidSpec(3), self.init)
        assert not is_independent([E(0, 1, 0)], MatroidSpec(3), self.init)

    def test_eligible_when_budget_exhausted(self):
        o = obj([[[[1.0]]], [[[1.0]]]])
        assert eligible_set([E(1, 0, 0)], MatroidSpec(1), [E(0, 0, 0)], o) == []

    def test_eligible_enumeration(self):
        o = obj([[[[1.0], [2.0]]], [[[1.0], [2.0]]]])
        ground = [e for e in o.all_edges() if e != E(0, 0, 0)]
        expected = [e for e in ground if is_independent([e], MatroidSpec(1), [E(0, 0, 0)])]
        assert expected == [E(1, 0, 0), E(1, 0, 1)]
        assert eligible_set([], MatroidSpec(1), [E(0, 0, 0)], o) == expected

    def test_no_free_robots(self):
        o = obj([[[[1.0]], [[1.0]]], [[[1.0]], [[1.0]]]])
        assert eligible_set([], MatroidSpec(3), [E(0, 0, 0), E(1, 1, 0)], o) == []


class TestAggregate:
    def test_elementwise_min(self):
        assert np.array_equal(aggregate_min([3.0, 7.0], [5.0, 2.0]), [3.0, 2.0])

    def test_idempotent(self):
        s = np.array([4.0, 1.0, 9.0])
        assert np.array_equal(aggregate_min(s, s), s)

    def test_neutral_element(self):
        s = np.array([4.0, 1.0])
        assert np.array_equal(aggregate_min(s, np.full(2, np.inf)), s)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            aggregate_min([1.0], [1.0, 2.0])


class TestMarginalDecrease:
    @staticmethod
    def state(row):
        st_ = TaskState(obj([[[row]]]), [E(0, 0, 0)])
        return st_

    def test_worked_example(self):
        # curr mean 15; new row [10, 5] has mean 7.5
        assert marginal_decrease(self.state([10.0, 20.0]), 0, np.array([30.0, 5.0])) == 7.5

    def test_dominated(self):
        assert marginal_decrease(self.state([10.0, 20.0]), 0, np.array([10.0, 25.0])) == 0.0

    def test_single_sample(self):
        assert marginal_decrease(self.state([10.0]), 0, np.array([4.0])) == 6.0


EXAMPLE = [[[[10.0, 20.0]]], [[[30.0, 5.0]]]]


class TestGreedy:
    def test_budget_zero(self):
        o = obj(EXAMPLE)
        base = initial_assignment(None, o)
        a = greedy_redundant_assignment(None, o, base, 0)
        assert a.redundant == []
        assert objective_value(a, o) == 15.0

    def test_worked_example(self):
        o = obj(EXAMPLE)
        base = initial_assignment(None, o)
        assert base.initial == (E(0, 0, 0),)
        a = greedy_redundant_assignment(None, o, base, 1)
        assert a.redundant == [E(1, 0, 0)]
        assert objective_value(a, o) == 7.5
        assert a.trace.deltas == [7.5]

    def test_tie_goes_to_lowest_triple(self):
        # robots 1 and 2 both give delta 7.5
        o = obj([[[[10.0, 20.0]]], [[[30.0, 5.0]]], [[[5.0, 30.0]]]])
        a = greedy_redundant_assignment(None, o, (E(0, 0, 0),), 1)
        assert a.trace.deltas == [7.5]
        assert a.redundant == [E(1, 0, 0)]

    def test_stops_when_robots_run_out(self):
        o = obj(EXAMPLE)
        a = greedy_redundant_assignment(None, o, (E(0, 0, 0),), 5)
        assert a.redundant == [E(1, 0, 0)]

    def test_zero_gain_still_fills_budget(self):
        o = obj([[[[1.0, 1.0]]], [[[9.0, 9.0]]]])
        a = greedy_redundant_assignment(None, o, (E(0, 0, 0),), 1)
        assert a.redundant == [E(1, 0, 0)]
        assert a.trace.deltas == [0.0]

    @staticmethod
    def naive_greedy(o, initial, budget):
        """Straight transcription of the selection loop with scalar evaluations."""
        state = TaskState(o, initial)
        chosen, deltas, evals = [], [], 0
        for _ in range(budget):
            best, best_d = None, -np.inf
            for e in eligible_set(chosen, MatroidSpec(budget), initial, o):
                evals += 1
                d = marginal_decrease(state, e.goal, o[e])
                if d > best_d:
                    best, best_d = e, d
            if best is None:
                break
            chosen.append(best)
            deltas.append(best_d)
            state.add(best, o[best])
        return chosen, deltas, evals

    @pytest.mark.parametrize("seed", range(15))
    def test_matches_scalar_transcription(self, seed):
        rng = np.random.default_rng(seed)
        n, m = int(rng.integers(3, 8)), int(rng.integers(1, 4))
        o = random_objective(rng, n, m, 3, 40)
        base = initial_assignment(None, o)
        budget = int(rng.integers(0, n - m + 2))
        a = greedy_redundant_assignment(None, o, base, budget)
        chosen, deltas, evals = self.naive_greedy(o, base.initial, budget)
        assert a.redundant == chosen
        assert a.trace.deltas == deltas
        assert a.trace.evaluations == evals

    @pytest.mark.parametrize("seed", range(10))
    def test_budget_nesting(self, seed):
        table, o, _ = small_instance(seed, 8, 2, 3, 30)
        base = initial_assignment(table, o)
        runs = [greedy_redundant_assignment(table, o, base, b) for b in range(7)]
        for short, long in zip(runs, runs[1:]):
            assert long.redundant[: len(short.redundant)] == short.redundant
        values = [objective_value(r, o) for r in runs]
        assert all(b <= a for a, b in zip(values, values[1:]))


class TestObjective:
    def test_reduces_to_baseline(self):
        o = obj([[[[2.0, 4.0]], [[9.0, 9.0]]], [[[8.0, 8.0]], [[1.0, 3.0]]]])
        base = initial_assignment(None, o)
        assert base.initial == (E(0, 0, 0), E(1, 1, 0))
        # mean over goals of 3.0 and 2.0
        assert objective_value(base, o) == 2.5

    def test_worked_example(self):
        o = obj(EXAMPLE)
        assert objective_value(AssignmentSet((E(0, 0, 0),), [E(1, 0, 0)]), o) == 7.5

    def test_dominated_edge_no_change(self):
        o = obj([[[[10.0, 20.0]]], [[[11.0, 25.0]]]])
        base = AssignmentSet((E(0, 0, 0),))
        assert objective_value(AssignmentSet(base.initial, [E(1, 0, 0)]), o) == objective_value(base, o)


class TestBaselines:
    def setup_method(self):
        self.table, self.o, _ = small_instance(3, 9, 2, 3, 20)
        self.base = initial_assignment(self.table, self.o)

    def test_random_budget_zero(self):
        assert baseline_random(self.table, self.base, 0, seed=1).redundant == []

    def test_random_deterministic_and_independent(self):
        a = baseline_random(self.table, self.base, 4, seed=11)
        assert a.redundant == baseline_random(self.table, self.base, 4, seed=11).redundant
        assert len(a.redundant) == 4
        assert is_independent(a.redundant, MatroidSpec(4), self.base.initial)
        for e in a.redundant:
            assert e.path < self.table.n_paths(e.robot, e.goal)

    def test_repeated_hungarian_budget_zero(self):
        assert baseline_repeated_hungarian(self.table, self.o, self.base, 0).redundant == []

    def test_repeated_hungarian_single_round(self):
        a = baseline_repeated_hungarian(self.table, self.o, self.base, 2)
        means, _ = self.o.best_path_means()
        free = [i for i in range(9) if i not in {e.robot for e in self.base.initial}]
        got = sum(means[e.robot, e.goal] for e in a.redundant)
        assert sorted(e.goal for e in a.redundant) == [0, 1]
        assert got == pytest.approx(brute_force_matching(means[free].T))

    def test_repeated_hungarian_truncates_last_round(self):
        # S = 1 so sample means are the listed numbers
        means = [[1, 9], [9, 1], [2, 8], [8, 3], [7, 4], [5, 6]]
        o = obj([[[[float(c)]] for c in row] for row in means])
        base = initial_assignment(None, o)
        assert base.initial == (E(0, 0, 0), E(1, 1, 0))
        # round 1 over robots 2..5 and round 2 over the two left, checked by enumeration
        c = np.array(means, dtype=float)
        assert brute_force_matching(c[[2, 3, 4, 5]].T) == 5.0  # robot 2 -> g0, robot 3 -> g1
        assert brute_force_matching(c[[4, 5]].T) == 9.0  # robot 4 -> g1 (4), robot 5 -> g0 (5)
        a = baseline_repeated_hungarian(None, o, base, 3)
        assert a.redundant == [E(2, 0, 0), E(3, 1, 0), E(4, 1, 0)]

    def test_repeated_hungarian_fewer_robots_than_goals(self):
        table, o, _ = small_instance(5, 4, 3, 2, 10)
        base = initial_assignment(table, o)
        a = baseline_repeated_hungarian(table, o, base, 5)
        assert len(a.redundant) == 1


class TestBestAposteriori:
    def _zero_variance_table(self, n, m, seed):
        g = generate_random_graph(GraphGenConfig(node_count=20, connectivity_radius=0.35, seed=seed))
        model = JointEdgeCostModel(np.random.default_rng(seed).uniform(10, 20, g.edge_count), np.zeros((g.edge_count,) * 2))
        placement = select_placement(g, n, m, 4, seed)
        table = build_path_table(g, model, placement, 3)
        return table, model

    @pytest.mark.parametrize("seed", range(5))
    def test_zero_variance_equals_initial(self, seed):
        table, model = self._zero_variance_table(6, 2, seed)
        o = SampledObjective.from_path_table(table, sample_edge_costs(model, 1, 0))
        assert best_aposteriori(table, draw_observed(model, 1)).initial == initial_assignment(table, o).initial

    def test_single_goal_argmin(self):
        table, o, samples = small_instance(7, 6, 1, 3, 10)
        observed = ObservedCosts(samples.samples[0], 0)
        cost, _ = realized_pair_costs(table, observed)
        a = best_aposteriori(table, observed)
        r = a.initial[0].robot
        assert cost[r, 0] == cost[:, 0].min()
        realized = [sum(observed.realized[list(p.edge_indices)]) for p in table[(r, 0)]]
        assert a.initial[0].path == int(np.argmin(realized))

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_brute_force(self, seed):
        table, o, samples = small_instance(20 + seed, 5, 3, 3, 10)
        observed = ObservedCosts(samples.samples[3], 0)
        cost, _ = realized_pair_costs(table, observed)
        a = best_aposteriori(table, observed)
        assert sum(cost[e.robot, e.goal] for e in a.initial) == pytest.approx(brute_force_matching(cost.T))


class TestBruteForce:
    def test_budget_zero(self):
        o = obj(EXAMPLE)
        base = AssignmentSet((E(0, 0, 0),))
        best, val = brute_force_optimal(None, o, base, 0)
        assert best.redundant == [] and val == 15.0

    def test_single_candidate_with_gain(self):
        o = obj(EXAMPLE)
        best, val = brute_force_optimal(None, o, AssignmentSet((E(0, 0, 0),)), 1)
        assert best.redundant == [E(1, 0, 0)] and val == 7.5

    def test_zero_gain_tie_includes(self):
        o = obj([[[[1.0, 1.0]]], [[[9.0, 9.0]]]])
        best, val = brute_force_optimal(None, o, AssignmentSet((E(0, 0, 0),)), 1)
        assert best.redundant == [E(1, 0, 0)] and val == 1.0

    @pytest.mark.parametrize("seed", range(10))
    def test_greedy_within_half_bound(self, seed):
        table, o, _ = small_instance(100 + seed, 5, 2, 2, 30)
        base = initial_assignment(table, o)
        j0 = objective_value(base, o)
        _, j_star = brute_force_optimal(table, o, base, 2)
        j_greedy = objective_value(greedy_redundant_assignment(table, o, base, 2), o)
        assert j_star <= j_greedy + 1e-12
        assert j_greedy <= 0.5 * (j_star + j0) + 1e-9

    def test_refuses_huge_instances(self):
        o = random_objective(np.random.default_rng(0), 30, 3, 4, 4)
        with pytest.raises(ValueError):
            brute_force_optimal(None, o, initial_assignment(None, o), 10, limit=1000)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_supermodular_and_monotone(seed):
    rng = np.random.default_rng(seed)
    o = random_objective(rng, 6, 2, 2, 12)
    base = initial_assignment(None, o)
    ground = [e for e in o.all_edges() if e not in base.initial]
    b = [e for e in ground if rng.random() < 0.5]
    a = [e for e in b if rng.random() < 0.5]
    rest = [e for e in ground if e not in b]
    if not rest:
        return
    x = rest[int(rng.integers(len(rest)))]

    def j(extra):
        return objective_value(AssignmentSet(base.initial, list(extra)), o)

    assert j(a) - j(a + [x]) >= j(b) - j(b + [x]) - 1e-9
    assert j(b + [x]) <= j(b)
