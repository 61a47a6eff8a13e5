"""Homomorphism search, exact mixed chromatic number and closed-form bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .graph import ColourSpec, GraphError, MixedGraph, dual_table, enumerate_graphs


@dataclass(frozen=True)
class VertexMap:
    source: MixedGraph
    target: MixedGraph
    image: tuple[int, ...]

    def __post_init__(self):
        if len(self.image) != self.source.p:
            raise GraphError("image must have one entry per source vertex")
        if any(not 0 <= h < self.target.p for h in self.image):
            raise GraphError("image entry outside the target's vertex range")


def is_homomorphism(f: VertexMap) -> bool:
    G, H, img = f.source, f.target, f.image
    if G.spec != H.spec:
        return False
    hc = H.code
    for u, v, x in G.adjacencies():
        if hc[img[u]][img[v]] != x:
            return False
    return True


def _search_order(G: MixedGraph) -> list[int]:
    return sorted(range(G.p), key=lambda v: (-G.degrees[v], v))


def find_homomorphism(G: MixedGraph, H: MixedGraph) -> VertexMap | None:
    """Complete backtracking search for ``G -> H``.

    Domains are bitmasks over ``V(H)``. Each assignment filters the domains
    of unassigned neighbours to the vertices carrying the required code
    (forward checking); the next variable is the one with the smallest
    domain, ties broken by descending degree then vertex id.
    """
    if G.spec != H.spec:
        raise GraphError(f"colour specs differ: {G.spec} vs {H.spec}")
    if G.p == 0:
        return VertexMap(G, H, ())
    if H.p == 0:
        return None
    full = (1 << H.p) - 1
    gcode, gnb = G.code, G.neighbours
    hmask = H.code_masks
    rank = {v: i for i, v in enumerate(_search_order(G))}
    dom = [full] * G.p
    image = [-1] * G.p
    unassigned = set(range(G.p))

    def pick() -> int:
        return min(unassigned, key=lambda v: (dom[v].bit_count(), rank[v]))

    def solve() -> bool:
        if not unassigned:
            return True
        v = pick()
        unassigned.discard(v)
        d = dom[v]
        while d:
            low = d & -d
            h = low.bit_length() - 1
            d ^= low
            saved = []
            ok = True
            row = hmask[h]
            for u in gnb[v]:
                if image[u] >= 0:
                    continue
                nd = dom[u] & row[gcode[v][u]]
                saved.append((u, dom[u]))
                dom[u] = nd
                if not nd:
                    ok = False
                    break
            if ok:
                image[v] = h
                if solve():
                    return True
                image[v] = -1
            for u, old in saved:
                dom[u] = old
        unassigned.add(v)
        return False

    if not solve():
        return None
    return VertexMap(G, H, tuple(image))


# -- partitions and quotients ----------------------------------------------

@dataclass(frozen=True)
class Partition:
    """Block id of each vertex; ids are ``0..k-1`` and every block is used."""

    blocks: tuple[int, ...]

    def __post_init__(self):
        used = set(self.blocks)
        if used != set(range(len(used))):
            raise GraphError("block ids must be contiguous from 0")

    @property
    def k(self) -> int:
        return len(set(self.blocks))

    @classmethod
    def from_labels(cls, labels: Sequence) -> Partition:
        """Renumber arbitrary labels by first appearance."""
        ids: dict = {}
        return cls(tuple(ids.setdefault(x, len(ids)) for x in labels))


def fibres(f: VertexMap) -> Partition:
    return Partition.from_labels(f.image)


class QuotientConflict(Exception):
    """Raised when a partition does not induce a valid target graph."""

    def __init__(self, u: int, v: int, reason: str):
        super().__init__(f"vertices {u} and {v}: {reason}")
        self.pair = (u, v)


def quotient(G: MixedGraph, P: Partition) -> MixedGraph:
    if len(P.blocks) != G.p:
        raise GraphError("partition size does not match graph")
    k = P.k
    b = P.blocks
    rows = [[0] * k for _ in range(k)]
    first: dict[tuple[int, int], tuple[int, int]] = {}
    dt = dual_table(G.spec)
    for u, v, x in G.adjacencies():
        bu, bv = b[u], b[v]
        if bu == bv:
            raise QuotientConflict(u, v, f"adjacent but both in block {bu}")
        cur = rows[bu][bv]
        if cur and cur != x:
            w = first[(bu, bv)]
            raise QuotientConflict(u, v, f"blocks {bu},{bv} get code {x} here but "
                                         f"{cur} from pair {w}")
        if not cur:
            rows[bu][bv] = x
            rows[bv][bu] = dt[x]
            first[(bu, bv)] = first[(bv, bu)] = (u, v)
    return MixedGraph(G.spec, k, tuple(map(tuple, rows)))


# -- chromatic number ------------------------------------------------------

@dataclass(frozen=True)
class ChromaticResult:
    chi: int
    witness_target: MixedGraph
    witness_map: VertexMap


def _colour_with(G: MixedGraph, k: int, order: list[int]) -> list[int] | None:
    """Assign vertices to at most ``k`` blocks with a conflict-free quotient."""
    p = G.p
    code, nb, nmask = G.code, G.neighbours, G.nbr_mask
    dt = dual_table(G.spec)
    block = [-1] * p
    members = [0] * k
    bc = [[0] * k for _ in range(k)]

    def place(idx: int, used: int) -> bool:
        if idx == p:
            return True
        v = order[idx]
        for b in range(min(used + 1, k)):
            if nmask[v] & members[b]:
                continue
            changed = []
            ok = True
            for u in nb[v]:
                bu = block[u]
                if bu < 0:
                    continue
                x = code[v][u]
                cur = bc[b][bu]
                if cur == 0:
                    bc[b][bu] = x
                    bc[bu][b] = dt[x]
                    changed.append(bu)
                elif cur != x:
                    ok = False
                    break
            if ok:
                block[v] = b
                members[b] |= 1 << v
                if place(idx + 1, max(used, b + 1)):
                    return True
                members[b] ^= 1 << v
                block[v] = -1
            for bu in changed:
                bc[b][bu] = bc[bu][b] = 0
        return False

    return block if place(0, 0) else None


def chromatic_number(G: MixedGraph) -> ChromaticResult:
    """Exact chi(G, m, n) by searching vertex partitions with valid quotients.

    Blocks are opened in order (a vertex may open at most one new block),
    which removes the k! relabellings of each partition.
    """
    order = _search_order(G)
    lo = 0 if G.p == 0 else (2 if G.num_adjacencies() else 1)
    for k in range(lo, G.p + 1):
        blocks = _colour_with(G, k, order)
        if blocks is not None:
            P = Partition.from_labels(blocks)
            Q = quotient(G, P)
            f = VertexMap(G, Q, P.blocks)
            assert is_homomorphism(f)
            return ChromaticResult(P.k, Q, f)
    raise AssertionError("the identity partition is always valid")


def chromatic_number_oracle(G: MixedGraph, kmax: int) -> int | None:
    """Smallest ``k <= kmax`` such that ``G`` maps to some graph on ``k`` vertices.

    Targets are enumerated exhaustively. Only complete targets are tried:
    adding adjacencies to a target never destroys a homomorphism into it,
    so a ``k``-vertex target exists iff a complete one does.
    """
    if G.p == 0:
        return 0
    for k in range(1, kmax + 1):
        for H in enumerate_graphs(G.spec, k, complete=True):
            if find_homomorphism(G, H) is not None:
                return k
    return None


# -- bounds ----------------------------------------------------------------

@dataclass(frozen=True)
class BoundTable:
    """Closed-form bounds; ``None`` marks an entry outside its stated range."""

    delta: int
    spec: ColourSpec
    sopena: int | None
    sopena_value: int
    ksz: int
    dns: int | None
    lower_floor: int
    lower_ceil: int
    min_one_universal: int

    def rows(self) -> list[tuple[str, str]]:
        na = lambda x: "n/a" if x is None else str(x)  # noqa: E731
        return [
            ("delta", str(self.delta)),
            ("m", str(self.spec.m)),
            ("n", str(self.spec.n)),
            ("c", str(self.spec.c)),
            ("sopena", na(self.sopena)),
            ("sopena_formula_value", str(self.sopena_value)),
            ("ksz", str(self.ksz)),
            ("dns", na(self.dns)),
            ("lower_floor", str(self.lower_floor)),
            ("lower_ceil", str(self.lower_ceil)),
            ("min_one_universal", str(self.min_one_universal)),
        ]


def _sopena_value(delta: int, c: int) -> int:
    if delta < 1:
        return 0
    return (2 * delta - 1) * c ** (2 * delta - 2)


def bounds(delta: int, spec: ColourSpec) -> BoundTable:
    if delta < 0:
        raise GraphError("delta must be non-negative")
    c = spec.c
    sv = _sopena_value(delta, c)
    dns = None
    if c >= 2 and delta >= 5:
        dns = 2 * (delta - 1) ** c * c ** (delta - min(c, 3) + 2)
    # c^(delta/2) as an exact floor/ceil pair
    if delta % 2 == 0:
        lo = hi = c ** (delta // 2)
    else:
        sq = c ** delta
        lo = math.isqrt(sq)
        hi = lo if lo * lo == sq else lo + 1
    return BoundTable(
        delta=delta,
        spec=spec,
        sopena=sv if delta >= 2 else None,
        sopena_value=sv,
        ksz=delta * delta * c ** (delta + 1),
        dns=dns,
        lower_floor=lo,
        lower_ceil=hi,
        min_one_universal=min_one_universal_size(spec),
    )


def min_one_universal_size(spec: ColourSpec) -> int:
    """Smallest c >= 1 with C(c, 2) >= m + n."""
    c = 1
    while math.comb(c, 2) < spec.m + spec.n:
        c += 1
    return c
