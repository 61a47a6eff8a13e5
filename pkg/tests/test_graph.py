import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixedcolour.graph import (
    CodeRangeError,
    ColourSpec,
    ConflictError,
    GraphError,
    GraphFormatError,
    LoopError,
    MixedGraph,
    NotAdjacentError,
    adjacency_vector,
    build_graph,
    dual,
    edgeless,
    enumerate_graphs,
    from_labelled,
    is_complete_subgraph,
    max_degree,
    parse,
    random_bounded_degree,
    random_complete,
    serialize,
)

ORIENTED = ColourSpec(0, 1)
PLAIN = ColourSpec(1, 0)


@pytest.fixture
def oriented_path():
    return build_graph(ORIENTED, 3, [(0, 1, 1), (1, 2, 1)])


@pytest.fixture
def directed_triangle():
    return build_graph(ORIENTED, 3, [(0, 1, 1), (1, 2, 1), (2, 0, 1)])


specs = st.tuples(st.integers(0, 4), st.integers(0, 4)).filter(any).map(lambda t: ColourSpec(*t))


@st.composite
def graphs(draw, max_p=8):
    spec = draw(specs)
    p = draw(st.integers(0, max_p))
    pairs = list(itertools.combinations(range(p), 2))
    codes = draw(st.lists(st.integers(0, spec.c), min_size=len(pairs), max_size=len(pairs)))
    flips = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    triples = [((v, u) if f else (u, v)) + (x,) for (u, v), x, f in zip(pairs, codes, flips) if x]
    return build_graph(spec, p, triples)


class TestDual:
    def test_non_adjacency(self):
        assert dual(0, ColourSpec(2, 3)) == 0

    def test_edges_fixed(self):
        assert dual(1, ColourSpec(1, 1)) == 1

    def test_arc_ranges_swap(self):
        s = ColourSpec(1, 1)
        assert dual(2, s) == 3
        assert dual(3, s) == 2

    def test_out_of_range(self):
        with pytest.raises(CodeRangeError):
            dual(4, ColourSpec(1, 1))
        with pytest.raises(CodeRangeError):
            dual(-1, ColourSpec(1, 1))

    @given(specs, st.data())
    def test_involution_fixing_edges(self, spec, data):
        x = data.draw(st.integers(0, spec.c))
        assert dual(dual(x, spec), spec) == x
        if x <= spec.m:
            assert dual(x, spec) == x
        else:
            assert dual(x, spec) != x


def test_colour_spec_needs_a_code():
    with pytest.raises(GraphError):
        ColourSpec(0, 0)
    assert ColourSpec(2, 3).c == 8


class TestBuildGraph:
    def test_single_arc(self):
        G = build_graph(ORIENTED, 2, [(0, 1, 1)])
        assert G.code[0][1] == 1 and G.code[1][0] == 2
        assert G.arcs(1) == [(0, 1)]

    def test_path_p3(self):
        G = build_graph(PLAIN, 3, [(0, 1, 1), (1, 2, 1)])
        assert G.edges(1) == [(0, 1), (1, 2)]
        assert G.code[0][2] == 0

    def test_pair_twice(self):
        with pytest.raises(ConflictError):
            build_graph(ORIENTED, 2, [(0, 1, 1), (1, 0, 1)])

    def test_loop(self):
        with pytest.raises(LoopError):
            build_graph(ORIENTED, 2, [(1, 1, 1)])

    def test_code_range(self):
        with pytest.raises(CodeRangeError):
            build_graph(ORIENTED, 2, [(0, 1, 3)])
        with pytest.raises(CodeRangeError):
            build_graph(ORIENTED, 2, [(0, 1, 0)])

    def test_matrix_invariants_checked(self):
        with pytest.raises(ConflictError):
            MixedGraph(ORIENTED, 2, ((0, 1), (1, 0)))
        with pytest.raises(LoopError):
            MixedGraph(PLAIN, 1, ((1,),))

    def test_labelled_input_is_relabelled(self):
        G = from_labelled(ORIENTED, [("x", "y", 1), ("y", "z", 2)])
        assert G.labels == ("x", "y", "z")
        assert G.code[1][2] == 2 and G.code[2][1] == 1


class TestAdjacencyVector:
    def test_oriented_path_middle(self, oriented_path):
        assert adjacency_vector(oriented_path, 1, (0, 2)) == (2, 1)

    def test_empty(self, oriented_path):
        assert adjacency_vector(oriented_path, 0, ()) == ()

    def test_plain_path(self):
        G = build_graph(PLAIN, 3, [(0, 1, 1), (1, 2, 1)])
        assert adjacency_vector(G, 1, (0, 2)) == (1, 1)

    def test_not_adjacent(self, oriented_path):
        with pytest.raises(NotAdjacentError):
            adjacency_vector(oriented_path, 0, (2,))

    @given(graphs())
    def test_entries_in_alphabet(self, G):
        for x in range(G.p):
            X = G.neighbours[x]
            assert all(1 <= code <= G.spec.c for code in adjacency_vector(G, x, X))


def test_max_degree(oriented_path):
    assert max_degree(edgeless(ORIENTED, 3)) == 0
    assert max_degree(oriented_path) == 2
    K4 = build_graph(ColourSpec(1, 1), 4, [(u, v, 1 + (u + v) % 3) for u, v in itertools.combinations(range(4), 2)])
    assert max_degree(K4) == 3


def test_is_complete_subgraph(oriented_path, directed_triangle):
    assert is_complete_subgraph(oriented_path, [])
    assert is_complete_subgraph(oriented_path, [2])
    assert not is_complete_subgraph(oriented_path, {0, 2})
    assert is_complete_subgraph(directed_triangle, {0, 1, 2})


class TestGenerators:
    def test_degree_zero_is_edgeless(self):
        G = random_bounded_degree(ColourSpec(2, 1), 5, 0, 0.9, 3)
        assert G.num_adjacencies() == 0

    def test_degree_bound(self):
        G = random_bounded_degree(ORIENTED, 12, 2, 0.5, 7)
        assert max_degree(G) <= 2

    def test_deterministic(self):
        assert random_bounded_degree(ORIENTED, 12, 2, 0.5, 7) == random_bounded_degree(ORIENTED, 12, 2, 0.5, 7)
        assert random_complete(ORIENTED, 30, 1) == random_complete(ORIENTED, 30, 1)
        assert random_complete(ORIENTED, 30, 1) != random_complete(ORIENTED, 30, 2)

    def test_complete_single_vertex(self):
        assert random_complete(PLAIN, 1, 0).p == 1

    def test_complete_is_complete(self):
        G = random_complete(ORIENTED, 50, 11)
        assert is_complete_subgraph(G, range(50))

    @pytest.mark.parametrize("spec", [ColourSpec(0, 1), ColourSpec(1, 1), ColourSpec(2, 2)])
    def test_code_frequencies_uniform(self, spec):
        # 448 vertices -> 100128 pairs; Pearson chi-square against uniform
        G = random_complete(spec, 448, 5)
        iu = np.triu_indices(G.p, 1)
        codes = G.matrix[iu]
        counts = np.bincount(codes, minlength=spec.c + 1)[1:]
        expected = codes.size / spec.c
        assert all(abs(cnt - expected) < 3 * np.sqrt(expected * (1 - 1 / spec.c)) for cnt in counts)
        stat = float(((counts - expected) ** 2 / expected).sum())
        # 0.999 quantiles of chi-square with c-1 dof, c in {2, 3, 6}
        limit = {2: 10.83, 3: 13.82, 6: 20.52}[spec.c]
        assert stat < limit


def test_enumerate_graphs_counts():
    assert sum(1 for _ in enumerate_graphs(ColourSpec(1, 1), 3)) == 4 ** 3
    assert sum(1 for _ in enumerate_graphs(ColourSpec(1, 1), 3, complete=True)) == 3 ** 3
    assert len(set(enumerate_graphs(ORIENTED, 3))) == 27


class TestTextFormat:
    def test_serializer_sorted_and_typed(self):
        G = build_graph(ColourSpec(1, 1), 4, [(3, 0, 2), (1, 2, 1), (0, 2, 3)])
        assert serialize(G, ["hello"]).splitlines() == [
            "# hello", "mixed 1 1 4", "a 2 0 1", "a 3 0 1", "e 1 2 1"]

    @settings(max_examples=200)
    @given(graphs(max_p=10))
    def test_round_trip(self, G):
        assert parse(serialize(G)) == G

    @pytest.mark.parametrize("text, lineno", [
        ("mixed 0 1 2\na 0 1 1\na 1 0 1\n", 3),
        ("mixed 0 1 2\na 0 0 1\n", 2),
        ("mixed 0 1 2\n\n# c\na 0 1 2\n", 4),
        ("mixed 1 0 2\na 0 1 1\n", 2),
        ("mixed 0 1 2\ne 0 1 1\n", 2),
        ("mixed 0 1 2\na 0 5 1\n", 2),
        ("mixed 0 1 2\nq 0 1 1\n", 2),
        ("mixed 0 0 2\n", 1),
        ("graph 0 1 2\n", 1),
        ("mixed 0 1 x\n", 1),
    ])
    def test_parse_errors_carry_line_numbers(self, text, lineno):
        with pytest.raises(GraphFormatError) as err:
            parse(text)
        assert err.value.lineno == lineno
        assert f"line {lineno}:" in str(err.value)

    def test_missing_header(self):
        with pytest.raises(GraphFormatError):
            parse("# only a comment\n")
