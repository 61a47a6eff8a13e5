"""(m, n)-coloured mixed graphs stored as a single adjacency-code matrix.

Viewed from vertex ``x``, the adjacency to ``y`` is an integer code:

* ``0``                    -- not adjacent
* ``1 .. m``               -- edge of that colour
* ``m+1 .. m+n``           -- arc of colour ``code - m`` from ``x`` to ``y``
* ``m+n+1 .. m+2n``        -- arc of colour ``code - m - n`` from ``y`` to ``x``
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Iterator, Sequence

import numpy as np


class GraphError(ValueError):
    """Base class for invalid graph input."""


class CodeRangeError(GraphError):
    pass


class LoopError(GraphError):
    pass


class ConflictError(GraphError):
    pass


class NotAdjacentError(GraphError):
    pass


class GraphFormatError(GraphError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True, order=True)
class ColourSpec:
    m: int
    n: int

    def __post_init__(self):
        if self.m < 0 or self.n < 0:
            raise GraphError(f"colour counts must be non-negative, got m={self.m}, n={self.n}")
        if self.m + 2 * self.n < 1:
            raise GraphError("need m + 2n >= 1")

    @property
    def c(self) -> int:
        """Size of the adjacency-code alphabet."""
        return self.m + 2 * self.n

    def __str__(self):
        return f"({self.m},{self.n})"


def dual(code: int, spec: ColourSpec) -> int:
    """The same adjacency seen from the other endpoint."""
    m, n = spec.m, spec.n
    if not 0 <= code <= m + 2 * n:
        raise CodeRangeError(f"code {code} outside 0..{m + 2 * n}")
    if code <= m:
        return code
    if code <= m + n:
        return code + n
    return code - n


def dual_table(spec: ColourSpec) -> tuple[int, ...]:
    return tuple(dual(c, spec) for c in range(spec.c + 1))


@dataclass(frozen=True)
class MixedGraph:
    """Immutable mixed graph on vertices ``0 .. p-1``.

    ``labels`` optionally records the original name of each vertex (for
    graphs relabelled on ingestion, or the structured vertices of a
    constructed target). Labels do not take part in equality.
    """

    spec: ColourSpec
    p: int
    code: tuple[tuple[int, ...], ...]
    labels: tuple | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if len(self.code) != self.p or any(len(row) != self.p for row in self.code):
            raise GraphError("code matrix must be p x p")
        if self.labels is not None and len(self.labels) != self.p:
            raise GraphError("labels must have one entry per vertex")
        dt = dual_table(self.spec)
        c = self.spec.c
        for u, row in enumerate(self.code):
            if row[u] != 0:
                raise LoopError(f"vertex {u} has a loop")
            for v in range(u + 1, self.p):
                x = row[v]
                if not 0 <= x <= c:
                    raise CodeRangeError(f"code {x} at ({u},{v}) outside 0..{c}")
                if self.code[v][u] != dt[x]:
                    raise ConflictError(f"codes at ({u},{v}) and ({v},{u}) disagree")

    @cached_property
    def neighbours(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(v for v, x in enumerate(row) if x) for row in self.code)

    @cached_property
    def nbr_mask(self) -> tuple[int, ...]:
        return tuple(sum(1 << v for v in nb) for nb in self.neighbours)

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(nb) for nb in self.neighbours)

    @cached_property
    def matrix(self) -> np.ndarray:
        """Read-only numpy view of the code matrix."""
        a = np.array(self.code, dtype=np.int16).reshape(self.p, self.p)
        a.setflags(write=False)
        return a

    @cached_property
    def code_masks(self) -> tuple[tuple[int, ...], ...]:
        """``code_masks[h][x]`` is the bitmask of vertices ``h'`` with ``code[h][h'] == x``."""
        out = []
        for row in self.code:
            masks = [0] * (self.spec.c + 1)
            for v, x in enumerate(row):
                masks[x] |= 1 << v
            out.append(tuple(masks))
        return tuple(out)

    def adjacencies(self) -> Iterator[tuple[int, int, int]]:
        """Yield ``(u, v, code[u][v])`` for each adjacent pair with ``u < v``."""
        for u, row in enumerate(self.code):
            for v in range(u + 1, self.p):
                if row[v]:
                    yield u, v, row[v]

    def num_adjacencies(self) -> int:
        return sum(self.degrees) // 2

    def edges(self, colour: int) -> list[tuple[int, int]]:
        """Edges of one colour (1-based), as ``(u, v)`` with ``u < v``."""
        return [(u, v) for u, v, x in self.adjacencies() if x == colour and colour <= self.spec.m]

    def arcs(self, colour: int) -> list[tuple[int, int]]:
        """Arcs of one colour (1-based), as ``(tail, head)``."""
        m, n = self.spec.m, self.spec.n
        out = []
        for u, v, x in self.adjacencies():
            if x == m + colour:
                out.append((u, v))
            elif x == m + n + colour:
                out.append((v, u))
        return out

    def with_adjacency(self, u: int, v: int, code: int) -> MixedGraph:
        """Copy with one extra adjacency between currently non-adjacent ``u``, ``v``."""
        if self.code[u][v]:
            raise ConflictError(f"{u} and {v} are already adjacent")
        rows = [list(r) for r in self.code]
        rows[u][v] = code
        rows[v][u] = dual(code, self.spec)
        return MixedGraph(self.spec, self.p, tuple(map(tuple, rows)))

    def induced(self, vertices: Sequence[int]) -> MixedGraph:
        vs = list(vertices)
        code = tuple(tuple(self.code[u][v] for v in vs) for u in vs)
        return MixedGraph(self.spec, len(vs), code)


def build_graph(spec: ColourSpec, p: int, adjacencies: Iterable[tuple[int, int, int]],
                labels: tuple | None = None) -> MixedGraph:
    """Build a graph from ``(u, v, code)`` triples, ``code`` seen from ``u``."""
    if p < 0:
        raise GraphError("p must be non-negative")
    c = spec.c
    rows = [[0] * p for _ in range(p)]
    for u, v, x in adjacencies:
        if not (0 <= u < p and 0 <= v < p):
            raise GraphError(f"vertex out of range in ({u},{v})")
        if u == v:
            raise LoopError(f"loop at vertex {u}")
        if not 1 <= x <= c:
            raise CodeRangeError(f"code {x} outside 1..{c}")
        if rows[u][v]:
            raise ConflictError(f"pair ({u},{v}) listed twice")
        rows[u][v] = x
        rows[v][u] = dual(x, spec)
    return MixedGraph(spec, p, tuple(map(tuple, rows)), labels)


def from_labelled(spec: ColourSpec, adjacencies: Iterable[tuple[Hashable, Hashable, int]],
                  vertices: Iterable[Hashable] = ()) -> MixedGraph:
    """Relabel arbitrary vertex names to ``0..p-1`` in order of first appearance."""
    index: dict = {}
    for v in vertices:
        index.setdefault(v, len(index))
    triples = []
    for u, v, x in adjacencies:
        iu = index.setdefault(u, len(index))
        iv = index.setdefault(v, len(index))
        triples.append((iu, iv, x))
    return build_graph(spec, len(index), triples, labels=tuple(index))


def edgeless(spec: ColourSpec, p: int) -> MixedGraph:
    return build_graph(spec, p, [])


def adjacency_vector(G: MixedGraph, x: int, X: Sequence[int]) -> tuple[int, ...]:
    """Codes from ``x`` to each vertex of ``X``, in order."""
    row = G.code[x]
    out = tuple(row[v] for v in X)
    for v, code in zip(X, out):
        if not code:
            raise NotAdjacentError(f"vertex {x} is not adjacent to {v}")
    return out


def max_degree(G: MixedGraph) -> int:
    return max(G.degrees, default=0)


def is_complete_subgraph(G: MixedGraph, X: Iterable[int]) -> bool:
    xs = list(X)
    return all(G.code[u][v] for u, v in itertools.combinations(xs, 2))


def random_bounded_degree(spec: ColourSpec, p: int, max_deg: int, edge_probability: float,
                          seed: int) -> MixedGraph:
    """Random graph with underlying maximum degree at most ``max_deg``.

    Candidate pairs are visited in a seeded random order and kept with
    ``edge_probability`` when both endpoints still have spare degree.
    """
    rng = random.Random(seed)
    pairs = list(itertools.combinations(range(p), 2))
    rng.shuffle(pairs)
    deg = [0] * p
    triples = []
    for u, v in pairs:
        if deg[u] >= max_deg or deg[v] >= max_deg:
            continue
        if rng.random() < edge_probability:
            deg[u] += 1
            deg[v] += 1
            triples.append((u, v, rng.randint(1, spec.c)))
    return build_graph(spec, p, triples)


def random_complete(spec: ColourSpec, t: int, seed: int) -> MixedGraph:
    """Complete mixed graph with every pair's code uniform on ``1..c``."""
    rng = np.random.default_rng(seed)
    iu, iv = np.triu_indices(t, 1)
    codes = rng.integers(1, spec.c + 1, size=iu.size)
    dt = np.array(dual_table(spec))
    a = np.zeros((t, t), dtype=np.int64)
    a[iu, iv] = codes
    a[iv, iu] = dt[codes]
    return MixedGraph(spec, t, tuple(map(tuple, a.tolist())))


def enumerate_graphs(spec: ColourSpec, p: int, complete: bool = False) -> Iterator[MixedGraph]:
    """Every labelled mixed graph on ``p`` vertices (or only the complete ones)."""
    pairs = list(itertools.combinations(range(p), 2))
    alphabet = range(1, spec.c + 1) if complete else range(spec.c + 1)
    dt = dual_table(spec)
    for codes in itertools.product(alphabet, repeat=len(pairs)):
        rows = [[0] * p for _ in range(p)]
        for (u, v), x in zip(pairs, codes):
            rows[u][v] = x
            rows[v][u] = dt[x]
        yield MixedGraph(spec, p, tuple(map(tuple, rows)))


# -- text format -----------------------------------------------------------

def serialize(G: MixedGraph, comments: Sequence[str] = ()) -> str:
    m, n = G.spec.m, G.spec.n
    lines = [f"# {c}" for c in comments]
    lines.append(f"mixed {m} {n} {G.p}")
    for u, v, x in G.adjacencies():
        if x <= m:
            lines.append(f"e {u} {v} {x}")
        elif x <= m + n:
            lines.append(f"a {u} {v} {x - m}")
        else:
            lines.append(f"a {v} {u} {x - m - n}")
    return "\n".join(lines) + "\n"


def _int(tok: str, lineno: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise GraphFormatError(lineno, f"{what} must be an integer, got {tok!r}") from None


def parse(text: str) -> MixedGraph:
    """Parse the ``mixed m n p`` text format; errors carry line numbers."""
    header = None
    rows: list[list[int]] = []
    spec = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if header is None:
            if toks[0] != "mixed" or len(toks) != 4:
                raise GraphFormatError(lineno, "expected header 'mixed <m> <n> <p>'")
            m, n, p = (_int(t, lineno, name) for t, name in zip(toks[1:], ("m", "n", "p")))
            if p < 0:
                raise GraphFormatError(lineno, "p must be non-negative")
            try:
                spec = ColourSpec(m, n)
            except GraphError as e:
                raise GraphFormatError(lineno, str(e)) from None
            header = (m, n, p)
            rows = [[0] * p for _ in range(p)]
            continue
        m, n, p = header
        if toks[0] not in ("e", "a") or len(toks) != 4:
            raise GraphFormatError(lineno, "expected 'e <u> <v> <colour>' or 'a <u> <v> <colour>'")
        u, v, col = (_int(t, lineno, name) for t, name in zip(toks[1:], ("u", "v", "colour")))
        if not (0 <= u < p and 0 <= v < p):
            raise GraphFormatError(lineno, f"vertex out of range 0..{p - 1}")
        if u == v:
            raise GraphFormatError(lineno, f"loop at vertex {u}")
        if toks[0] == "e":
            if not 1 <= col <= m:
                raise GraphFormatError(lineno, f"edge colour {col} outside 1..{m}")
            x = col
        else:
            if not 1 <= col <= n:
                raise GraphFormatError(lineno, f"arc colour {col} outside 1..{n}")
            x = m + col
        if rows[u][v]:
            raise GraphFormatError(lineno, f"pair ({u},{v}) already joined")
        rows[u][v] = x
        rows[v][u] = dual(x, spec)
    if header is None:
        raise GraphFormatError(0, "missing 'mixed' header")
    return MixedGraph(spec, header[2], tuple(map(tuple, rows)))


def read_graph(path) -> MixedGraph:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())
