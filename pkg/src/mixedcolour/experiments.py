"""Named, seeded experiments behind ``mixedcolour repro <name>``.

Each experiment returns an :class:`ExperimentResult` whose ``lines`` are the
TSV verdict printed by the CLI. Procedures and seeds are fixed here so that
a run is one command and its output is byte-identical across runs.
"""

from __future__ import annotations

import itertools
import logging
import math
import random
import time
from dataclasses import dataclass, field
from typing import Callable

import mpmath

from .constructive import (build_H, build_Z, cyclic_factorization, has_property_P,
                           latin_factorization, universal_colouring)
from .graph import (ColourSpec, build_graph, dual, enumerate_graphs, parse, random_bounded_degree,
                    random_complete, serialize)
from .probabilistic import (LemmaParams, find_target, greedy_colouring, greedy_valid, lemma_inequalities,
                            union_bound)
from .solver import (QuotientConflict, VertexMap, chromatic_number, chromatic_number_oracle, fibres,
                     find_homomorphism, is_homomorphism, min_one_universal_size, quotient)

SMALL_SPECS = [ColourSpec(1, 0), ColourSpec(2, 0), ColourSpec(3, 0), ColourSpec(0, 1), ColourSpec(1, 1)]


@dataclass
class ExperimentResult:
    name: str
    passed: bool
    lines: list[str] = field(default_factory=list)
    elapsed: float = 0.0
    data: dict = field(default_factory=dict)


def path_graphs(spec: ColourSpec, p: int):
    """Every (m, n)-colouring of the path on ``p`` vertices, as graphs."""
    for codes in itertools.product(range(1, spec.c + 1), repeat=p - 1):
        yield build_graph(spec, p, [(i, i + 1, x) for i, x in enumerate(codes)])


def orientations_of_p5() -> list:
    spec = ColourSpec(0, 1)
    return list(path_graphs(spec, 5))


def edge_colourings_of_p5() -> list:
    return list(path_graphs(ColourSpec(2, 0), 5))


def exp_p5() -> ExperimentResult:
    t0 = time.perf_counter()
    oriented = [chromatic_number(G).chi for G in orientations_of_p5()]
    coloured = [chromatic_number(G).chi for G in edge_colourings_of_p5()]
    top_o, top_e = max(oriented), max(coloured)
    ok = len(oriented) == 16 and top_o == 3 and 4 in coloured
    return ExperimentResult("p5", ok, [
        f"max_oriented_chi\t{top_o}\tover\t{len(oriented)}\torientations",
        f"max_2edge_colour_chi\t{top_e}\tover\t{len(coloured)}\tcolourings",
    ], time.perf_counter() - t0, {"oriented": oriented, "coloured": coloured})


def random_small_graph(seed: int, p: int = 5):
    rng = random.Random(seed)
    spec = SMALL_SPECS[seed % len(SMALL_SPECS)]
    return random_bounded_degree(spec, p, p - 1, rng.uniform(0.2, 1.0), rng.randrange(2**31))


def exp_oracle(max_p: int = 4, samples: int = 200) -> ExperimentResult:
    t0 = time.perf_counter()
    checked = 0
    mismatches = []
    for spec in SMALL_SPECS:
        for p in range(1, max_p + 1):
            for G in enumerate_graphs(spec, p):
                checked += 1
                if chromatic_number(G).chi != chromatic_number_oracle(G, p):
                    mismatches.append(serialize(G))
    for seed in range(samples):
        G = random_small_graph(seed)
        checked += 1
        if chromatic_number(G).chi != chromatic_number_oracle(G, G.p):
            mismatches.append(serialize(G))
    return ExperimentResult("oracle", not mismatches, [
        f"graphs_checked\t{checked}",
        f"mismatches\t{len(mismatches)}",
    ], time.perf_counter() - t0, {"mismatches": mismatches})


PROP_Z_GRID = [(0, 1, 2), (0, 1, 3), (2, 0, 3), (1, 1, 3), (0, 1, 4)]


def exp_prop_z(grid=PROP_Z_GRID) -> ExperimentResult:
    t0 = time.perf_counter()
    lines = []
    ok = True
    for m, n, q in grid:
        spec = ColourSpec(m, n)
        Z = build_Z(spec, q, build_H(spec, cyclic_factorization(spec.c)))
        rep = has_property_P(Z, q - 1, 1)
        ok &= rep.holds
        lines.append(f"Z({m},{n},{q})\tvertices={Z.p}\t{rep.line()}")
    return ExperimentResult("prop-z", ok, lines, time.perf_counter() - t0)


class _RecordCounter(logging.Handler):
    def __init__(self):
        super().__init__(logging.INFO)
        self.count = 0

    def emit(self, record):
        self.count += 1


def exp_universal(count: int = 100) -> ExperimentResult:
    """Constructive colourings into Z; a run that needed the complete-search fallback fails."""
    t0 = time.perf_counter()
    lines = []
    ok = True
    clog = logging.getLogger("mixedcolour.constructive")
    for m, n, k, seed0 in [(0, 1, 2, 1000), (1, 1, 3, 2000)]:
        spec = ColourSpec(m, n)
        q = 2 * k - 1
        Z = build_Z(spec, q, build_H(spec, cyclic_factorization(spec.c)))
        expected = (2 * k - 1) * spec.c ** (2 * k - 2)
        valid = 0
        fallbacks = _RecordCounter()
        old_level = clog.level
        clog.addHandler(fallbacks)
        clog.setLevel(logging.INFO)
        try:
            for s in range(count):
                rng = random.Random(seed0 + s)
                G = random_bounded_degree(spec, rng.randint(2, 40), k, rng.uniform(0.3, 1.0), seed0 + s)
                if is_homomorphism(universal_colouring(G, Z, q, k)):
                    valid += 1
        finally:
            clog.removeHandler(fallbacks)
            clog.setLevel(old_level)
        ok &= valid == count and fallbacks.count == 0 and Z.p == expected
        lines.append(f"Z({m},{n},{q})\tvertices={Z.p}\tbound={expected}\tvalid={valid}/{count}"
                     f"\tsearch_fallbacks={fallbacks.count}")
    return ExperimentResult("universal", ok, lines, time.perf_counter() - t0)


DELTA1_SPECS = [(1, 0), (2, 0), (0, 1), (0, 2), (1, 1), (3, 3)]


def one_of_each_colour(spec: ColourSpec):
    """Disjoint union of one edge of each colour and one arc of each colour."""
    k = spec.m + spec.n
    return build_graph(spec, 2 * k, [(2 * i, 2 * i + 1, i + 1) for i in range(k)])


def exp_delta1() -> ExperimentResult:
    t0 = time.perf_counter()
    ok = True
    lines = []
    for m, n in DELTA1_SPECS:
        spec = ColourSpec(m, n)
        singles = [chromatic_number(build_graph(spec, 2, [(0, 1, x)])).chi for x in range(1, spec.c + 1)]
        chi = chromatic_number(one_of_each_colour(spec)).chi
        want = min_one_universal_size(spec)
        ok &= set(singles) == {2} and chi == want
        lines.append(f"({m},{n})\tconnected_chi={sorted(set(singles))}\tunion_chi={chi}\tmin_1_universal={want}")
    return ExperimentResult("delta1", ok, lines, time.perf_counter() - t0)


def exp_ineq(ks=range(4, 13), cs=range(3, 13)) -> ExperimentResult:
    t0 = time.perf_counter()
    worst1 = worst2 = math.inf
    for k in ks:
        for c in cs:
            m1, m2 = lemma_inequalities(k, c)
            worst1, worst2 = min(worst1, m1), min(worst2, m2)
    ok = worst1 > 0 and worst2 > 0
    return ExperimentResult("ineq", ok, [
        f"min_margin1\t{worst1:.12g}",
        f"min_margin2\t{worst2:.12g}",
    ], time.perf_counter() - t0)


def agree_digits(a, b) -> float:
    """Number of agreeing significant digits between two positive reals."""
    a, b = mpmath.mpf(a), mpmath.mpf(b)
    if a == b:
        return math.inf
    return float(-mpmath.log10(abs(a - b) / abs(b)))


def exp_union(k: int = 4, c: int = 3) -> ExperimentResult:
    t0 = time.perf_counter()
    params = LemmaParams(k, c)
    fl = union_bound(params, "float")
    mp = union_bound(params, "mpmath")
    ex = union_bound(params, "exact")
    digits = agree_digits(fl, mp)
    exact_digits = agree_digits(mpmath.mpf(ex.numerator) / ex.denominator, mp)
    ok = ex < 1 and fl < 1 and mp < 1 and digits >= 12 and exact_digits >= 12
    return ExperimentResult("union", ok, [
        f"t\t{params.t}",
        f"union_bound_float\t{fl:.15g}",
        f"union_bound_mpmath\t{mpmath.nstr(mp, 15)}",
        f"exact_below_one\t{ex < 1}",
        f"agreeing_digits_float_mpmath\t{min(digits, 99):.1f}",
        f"agreeing_digits_exact_mpmath\t{min(exact_digits, 99):.1f}",
    ], time.perf_counter() - t0, {"float": fl, "mpmath": mp, "exact": ex})


def exp_greedy(count: int = 500, seed: int = 2024, max_trials: int = 1000) -> ExperimentResult:
    t0 = time.perf_counter()
    spec = ColourSpec(0, 1)
    found = find_target(spec, 2, 20, max_trials, seed)
    if found is None:
        return ExperimentResult("greedy", False, ["target\tnone"], time.perf_counter() - t0)
    H = found.graph
    exhaustive = all(r.mode == "exhaustive" and r.holds for r in found.reports)
    valid = 0
    for s in range(count):
        rng = random.Random(seed + 1 + s)
        G = random_bounded_degree(spec, rng.randint(2, 40), 2, rng.uniform(0.3, 1.0), seed + 1 + s)
        trace = greedy_colouring(G, H, 2)
        if greedy_valid(G, H, trace):
            valid += 1
    lines = [f"target\ttrial={found.trial}\ttrial_seed={found.trial_seed}"]
    lines += [f"layer\t{r.line()}" for r in found.reports]
    lines.append(f"greedy_valid\t{valid}/{count}")
    return ExperimentResult("greedy", exhaustive and valid == count, lines, time.perf_counter() - t0,
                            {"target": H})


def _random_spec(rng: random.Random, top: int) -> ColourSpec:
    m, n = rng.randint(0, top), rng.randint(0, top)
    return ColourSpec(m, n) if m + n else ColourSpec(0, 1)


def exp_props(count: int = 1000, seed: int = 7) -> ExperimentResult:
    t0 = time.perf_counter()
    rng = random.Random(seed)
    fails = {"dual": 0, "roundtrip": 0, "fibres": 0, "monotone": 0}

    for _ in range(count):
        spec = _random_spec(rng, 4)
        x = rng.randint(0, spec.c)
        d = dual(x, spec)
        if dual(d, spec) != x or (x <= spec.m and d != x):
            fails["dual"] += 1

    for i in range(count):
        spec = _random_spec(rng, 3)
        G = random_bounded_degree(spec, rng.randint(0, 15), rng.randint(0, 5), rng.random(), rng.randrange(2**31))
        if parse(serialize(G)) != G:
            fails["roundtrip"] += 1

    for i in range(count):
        spec = SMALL_SPECS[i % len(SMALL_SPECS)]
        G = random_bounded_degree(spec, rng.randint(1, 8), 3, rng.uniform(0.2, 0.9), rng.randrange(2**31))
        H = random_complete(spec, rng.randint(2, 6), rng.randrange(2**31))
        f = find_homomorphism(G, H)
        if f is None:
            f = chromatic_number(G).witness_map
        try:
            Q = quotient(G, fibres(f))
        except QuotientConflict:
            fails["fibres"] += 1
            continue
        if not is_homomorphism(VertexMap(G, Q, fibres(f).blocks)):
            fails["fibres"] += 1

    for i in range(count):
        spec = SMALL_SPECS[i % len(SMALL_SPECS)]
        p = rng.randint(2, 7)
        G = random_bounded_degree(spec, p, p - 1, rng.uniform(0.1, 0.8), rng.randrange(2**31))
        missing = [(u, v) for u in range(p) for v in range(u + 1, p) if not G.code[u][v]]
        if not missing:
            continue
        u, v = rng.choice(missing)
        G2 = G.with_adjacency(u, v, rng.randint(1, spec.c))
        if chromatic_number(G2).chi < chromatic_number(G).chi:
            fails["monotone"] += 1

    ok = not any(fails.values())
    return ExperimentResult("props", ok, [f"{k}_violations\t{v}\tof\t{count}" for k, v in fails.items()],
                            time.perf_counter() - t0, fails)


def exp_factorizations() -> ExperimentResult:
    """Property P_{q-1,1} for Z built from a non-cyclic factorization of K_{3,3} and K_{4,4}."""
    t0 = time.perf_counter()
    squares = {
        3: [[0, 2, 1], [1, 0, 2], [2, 1, 0]],
        4: [[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]],
    }
    ok = True
    lines = []
    for spec, q in [(ColourSpec(1, 1), 3), (ColourSpec(3, 0), 3), (ColourSpec(0, 2), 3)]:
        fac = latin_factorization(squares[spec.c])
        Z = build_Z(spec, q, build_H(spec, fac))
        rep = has_property_P(Z, q - 1, 1)
        ok &= rep.holds
        lines.append(f"Z{spec}q={q}\tlatin\t{rep.line()}")
    return ExperimentResult("factorizations", ok, lines, time.perf_counter() - t0)


EXPERIMENTS: dict[str, Callable[[], ExperimentResult]] = {
    "p5": exp_p5,
    "oracle": exp_oracle,
    "prop-z": exp_prop_z,
    "universal": exp_universal,
    "delta1": exp_delta1,
    "ineq": exp_ineq,
    "union": exp_union,
    "greedy": exp_greedy,
    "props": exp_props,
    "factorizations": exp_factorizations,
}
