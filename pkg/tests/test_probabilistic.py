import itertools
import math
from fractions import Fraction

import mpmath
import pytest

from mixedcolour.graph import ColourSpec, GraphError, build_graph, edgeless, enumerate_graphs, random_bounded_degree
from mixedcolour.probabilistic import (
    LemmaParams,
    chained_bounds,
    common_neighbour_collisions,
    find_target,
    greedy_colouring,
    greedy_valid,
    layered_property_check,
    lemma_inequalities,
    log_tail_probability,
    probability_ledger,
    tail_probability,
    trial_seed,
    union_bound,
    unplaced_neighbour_collisions,
    witness_threshold,
)
from mixedcolour.solver import is_homomorphism

ORIENTED = ColourSpec(0, 1)


def enumerated_tail(spec, k, t, i):
    """P(fixed X = {0..i-1}, b = (1,..,1) has <= (k-i)(k-1) witnesses) over all complete targets."""
    X = range(i)
    bad = total = 0
    for H in enumerate_graphs(spec, t, complete=True):
        hits = sum(1 for x in range(i, t) if all(H.code[x][y] == 1 for y in X))
        bad += hits <= (k - i) * (k - 1)
        total += 1
    return Fraction(bad, total)


def enumerated_failure(spec, k, t):
    """Exact probability that a uniform complete target fails some layer."""
    bad = total = 0
    for H in enumerate_graphs(spec, t, complete=True):
        bad += not all(r.holds for r in layered_property_check(H, k, "exhaustive"))
        total += 1
    return Fraction(bad, total)


@pytest.fixture(scope="module")
def target_k3():
    found = find_target(ORIENTED, 3, 144, 5, 1)
    assert found is not None
    assert all(r.mode == "exhaustive" and r.holds for r in found.reports)
    return found.graph


class TestTail:
    def test_small_exact(self):
        assert tail_probability(LemmaParams(2, 2, 3), 1, "exact") == Fraction(3, 4)

    @pytest.mark.parametrize("k, c, t, i", [(2, 2, 5, 1), (2, 2, 5, 2), (3, 2, 5, 1), (3, 2, 5, 2), (2, 3, 4, 1)])
    def test_matches_enumeration(self, k, c, t, i):
        spec = ColourSpec(0, 1) if c == 2 else ColourSpec(1, 1)
        want = enumerated_tail(spec, k, t, i)
        params = LemmaParams(k, c, t)
        assert tail_probability(params, i, "exact") == want
        assert math.isclose(tail_probability(params, i), float(want), rel_tol=1e-12)
        assert math.isclose(float(tail_probability(params, i, "mpmath")), float(want), rel_tol=1e-12)

    def test_top_layer_is_no_witness(self):
        # i = k: cutoff 0, so the tail is (1 - c^-k)^(t-k)
        params = LemmaParams(3, 2, 40)
        assert tail_probability(params, 3, "exact") == Fraction(7, 8) ** 37

    def test_cutoff_covers_all_trials(self):
        assert tail_probability(LemmaParams(4, 2, 5), 1, "exact") == 1

    def test_range_and_monotone_in_t(self):
        for k, c in [(2, 2), (3, 3), (4, 3)]:
            for i in range(1, k + 1):
                vals = [tail_probability(LemmaParams(k, c, t), i, "exact") for t in range(k + 1, k + 60, 7)]
                assert all(0 <= v <= 1 for v in vals)
                assert all(a >= b for a, b in zip(vals, vals[1:]))

    def test_log_agrees_with_exact_when_tiny(self):
        params = LemmaParams(4, 3)
        ex = tail_probability(params, 1, "exact")
        lg = log_tail_probability(params, 1)
        want = float(mpmath.log(mpmath.mpf(ex.numerator) / ex.denominator))
        assert math.isclose(lg, want, rel_tol=1e-12)

    def test_bad_layer(self):
        with pytest.raises(GraphError):
            tail_probability(LemmaParams(3, 2, 10), 4)
        with pytest.raises(GraphError):
            tail_probability(LemmaParams(3, 2, 10), 1, "guess")

    def test_default_t(self):
        assert LemmaParams(4, 3).t == 3888
        assert witness_threshold(4, 1) == 10


class TestUnionBound:
    def test_reference_instance_below_one(self):
        params = LemmaParams(4, 3)
        ex = union_bound(params, "exact")
        assert ex < 1
        assert math.isclose(union_bound(params), float(ex), rel_tol=1e-12)
        assert math.isclose(float(union_bound(params, "mpmath")), float(ex), rel_tol=1e-14)

    def test_small_t_useless(self):
        assert union_bound(LemmaParams(4, 3, 10), "exact") >= 1

    @pytest.mark.parametrize("k, c, t", [(2, 2, 5), (2, 2, 6), (3, 2, 5)])
    def test_dominates_true_failure_probability(self, k, c, t):
        assert enumerated_failure(ORIENTED, k, t) <= union_bound(LemmaParams(k, c, t), "exact")

    def test_chain_dominates_exact(self):
        for k in range(4, 9):
            for c in range(3, 7):
                params = LemmaParams(k, c)
                ex = union_bound(params, "mpmath")
                lex = float(mpmath.log(ex))
                chain = chained_bounds(params)
                assert lex <= chain["terms"] <= chain["power"] + 1e-9
                assert chain["power"] <= chain["final"] + 1e-9

    def test_ledger_rows(self):
        rows = dict(probability_ledger(LemmaParams(4, 3)).rows())
        assert rows["t"] == "3888"
        assert float(rows["union_bound"]) < 1
        assert float(rows["exact_union_bound"]) < 1
        assert "log10_tail_1" in rows and "ineq2_margin" in rows


class TestInequalities:
    def test_reference_margins(self):
        m1, m2 = lemma_inequalities(4, 3)
        assert m1 > 0 and m2 > 0

    def test_final_chain_is_second_margin(self):
        # the final closed form is exp(-margin2) at the default t
        params = LemmaParams(4, 3)
        assert math.isclose(chained_bounds(params)["final"], -lemma_inequalities(4, 3)[1], rel_tol=1e-9)

    def test_grid(self):
        for k in range(4, 13):
            for c in range(3, 13):
                assert min(lemma_inequalities(k, c)) > 0

    def test_needs_two_codes(self):
        with pytest.raises(GraphError):
            lemma_inequalities(4, 1)


class TestLayeredCheck:
    def test_two_vertices_fail(self):
        H = build_graph(ORIENTED, 2, [(0, 1, 1)])
        reports = layered_property_check(H, 1)
        assert not reports[0].holds

    def test_needs_complete_target(self):
        with pytest.raises(GraphError):
            layered_property_check(edgeless(ORIENTED, 3), 2)

    def test_sampled_on_verified_target(self, target_k3):
        reports = layered_property_check(target_k3, 3, "sampled", trials=100_000, seed=9)
        assert all(r.holds and r.mode == "sampled" for r in reports)

    def test_auto_switches_to_sampling(self, target_k3):
        modes = [r.mode for r in layered_property_check(target_k3, 3, "auto", budget=10**6, trials=200)]
        assert modes == ["exhaustive", "sampled", "sampled"]


class TestFindTarget:
    def test_pigeonhole(self):
        assert find_target(ORIENTED, 3, 10, 100, 0) is None

    def test_deterministic(self):
        a = find_target(ORIENTED, 2, 20, 200, 5)
        b = find_target(ORIENTED, 2, 20, 200, 5)
        assert a is not None and a.graph == b.graph and a.trial == b.trial
        assert a.trial_seed == trial_seed(5, a.trial)

    def test_needs_t_at_least_k(self):
        with pytest.raises(GraphError):
            find_target(ORIENTED, 5, 3, 1, 0)


class TestGreedy:
    def test_edgeless(self, target_k3):
        trace = greedy_colouring(edgeless(ORIENTED, 4), target_k3, 3)
        assert trace.ok and trace.image == (0, 0, 0, 0)

    def test_single_arc(self, target_k3):
        trace = greedy_colouring(build_graph(ORIENTED, 2, [(0, 1, 1)]), target_k3, 3)
        assert greedy_valid(trace.source, target_k3, trace)
        assert target_k3.code[trace.image[0]][trace.image[1]] == 1

    def test_random_bounded_degree(self, target_k3):
        for seed in range(100):
            G = random_bounded_degree(ORIENTED, 30, 3, 0.6, seed)
            trace = greedy_colouring(G, target_k3, 3)
            assert trace.ok, f"stuck at step {trace.stuck_at} for seed {seed}"
            assert is_homomorphism(trace.vertex_map())
            assert unplaced_neighbour_collisions(G, trace) == []

    def test_trace_records_each_step(self, target_k3):
        G = build_graph(ORIENTED, 3, [(0, 1, 1), (1, 2, 1)])
        trace = greedy_colouring(G, target_k3, 3)
        assert [s.vertex for s in trace.steps] == [0, 1, 2]
        first = trace.steps[0]
        assert first.W == () and first.Y == (1,) and first.x_size == target_k3.p
        last = trace.steps[2]
        assert last.W == (1,) and last.b == (2,) and last.Y == ()

    def test_stuck(self):
        # a single arc as target: the head has no out-arc for the last vertex
        H = build_graph(ORIENTED, 2, [(0, 1, 1)])
        G = build_graph(ORIENTED, 3, [(0, 1, 1), (1, 2, 1)])
        trace = greedy_colouring(G, H, 2)
        assert not trace.ok and trace.stuck_at == 2
        with pytest.raises(GraphError):
            trace.vertex_map()

    def test_common_neighbour_placed_first(self, target_k3):
        # the centre goes first, so its two leaves need the same code and nothing separates them
        G = build_graph(ORIENTED, 3, [(0, 1, 1), (0, 2, 1)])
        trace = greedy_colouring(G, target_k3, 3)
        assert greedy_valid(G, target_k3, trace)
        assert trace.image[1] == trace.image[2]
        assert common_neighbour_collisions(G, trace.image) == [(1, 2, 0)]

    def test_degree_checked(self, target_k3):
        K5 = build_graph(ORIENTED, 5, [(u, v, 1) for u, v in itertools.combinations(range(5), 2)])
        with pytest.raises(GraphError):
            greedy_colouring(K5, target_k3, 3)
