"""Constructive universal targets: the bipartite gadget H and the q-partite graph Z.

A vertex of Z is ``(i; v_1, ..., v_q)`` with a hole at position ``i`` and
every other coordinate in ``1..c``. For ``v`` of index ``i`` and ``w`` of
index ``j > i``, the adjacency between them copies the adjacency between
``a_s`` and ``b_t`` in H, where ``s = v_j`` and ``t = w_i``.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .graph import ColourSpec, GraphError, GraphFormatError, MixedGraph, build_graph, max_degree
from .solver import VertexMap, find_homomorphism, is_homomorphism

log = logging.getLogger(__name__)


class UniversalityViolation(RuntimeError):
    """No homomorphism into a target that should be universal; carries the instance."""

    def __init__(self, G: MixedGraph, Z: MixedGraph, k: int):
        super().__init__(f"no homomorphism from a graph with max degree <= {k} into Z "
                         f"({Z.p} vertices)")
        self.G, self.Z, self.k = G, Z, k


# -- 1-factorizations of K_{c,c} ---------------------------------------------

@dataclass(frozen=True)
class OneFactorization:
    """``perms[i][j]`` is the B-partner of A-vertex ``j`` in factor ``i``."""

    c: int
    perms: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        c = self.c
        if c < 1 or len(self.perms) != c:
            raise GraphError(f"need exactly {c} factors")
        for perm in self.perms:
            if sorted(perm) != list(range(c)):
                raise GraphError(f"factor {perm} is not a permutation of 0..{c - 1}")
        for j in range(c):
            if len({perm[j] for perm in self.perms}) != c:
                raise GraphError("factors overlap; they must partition all c^2 pairs")


def cyclic_factorization(c: int) -> OneFactorization:
    return OneFactorization(c, tuple(tuple((j + i) % c for j in range(c)) for i in range(c)))


def latin_factorization(square: Sequence[Sequence[int]]) -> OneFactorization:
    """Factorization read off a Latin square: row ``i`` is factor ``i``."""
    return OneFactorization(len(square), tuple(tuple(r) for r in square))


def serialize_factorization(fac: OneFactorization) -> str:
    lines = [f"factorization {fac.c}"]
    lines += [" ".join(map(str, perm)) for perm in fac.perms]
    return "\n".join(lines) + "\n"


def parse_factorization(text: str) -> OneFactorization:
    c = None
    perms = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if c is None:
            if toks[0] != "factorization" or len(toks) != 2 or not toks[1].isdigit():
                raise GraphFormatError(lineno, "expected header 'factorization <c>'")
            c = int(toks[1])
            continue
        try:
            perm = tuple(int(t) for t in toks)
        except ValueError:
            raise GraphFormatError(lineno, "permutation entries must be integers") from None
        if len(perm) != c or sorted(perm) != list(range(c)):
            raise GraphFormatError(lineno, f"not a permutation of 0..{c - 1}")
        perms.append(perm)
    if c is None:
        raise GraphFormatError(0, "missing 'factorization' header")
    try:
        return OneFactorization(c, tuple(perms))
    except GraphError as e:
        raise GraphFormatError(0, str(e)) from None


# -- H and Z -----------------------------------------------------------------

def build_H(spec: ColourSpec, fac: OneFactorization) -> MixedGraph:
    """Coloured K_{c,c}: A is ``0..c-1``, B is ``c..2c-1``.

    Factor ``i`` (1-based) is given code ``i`` from the A side, which makes
    factors ``1..m`` edges, ``m+1..m+n`` arcs A->B and the rest arcs B->A.
    """
    c = spec.c
    if fac.c != c:
        raise GraphError(f"factorization has size {fac.c}, colour spec needs {c}")
    triples = [(j, c + perm[j], i + 1) for i, perm in enumerate(fac.perms) for j in range(c)]
    H = build_graph(spec, 2 * c, triples)
    for v in range(2 * c):
        if sorted(x for x in H.code[v] if x) != list(range(1, c + 1)):
            raise AssertionError(f"vertex {v} of H misses some edge colour or arc orientation")
    return H


class ZVertex(NamedTuple):
    """``coords[index-1] == 0`` marks the hole."""

    index: int
    coords: tuple[int, ...]

    def __str__(self):
        cs = ",".join("." if x == 0 else str(x) for x in self.coords)
        return f"({self.index};{cs})"


def z_vertices(c: int, q: int) -> Iterator[ZVertex]:
    for i in range(1, q + 1):
        for rest in itertools.product(range(1, c + 1), repeat=q - 1):
            yield ZVertex(i, rest[: i - 1] + (0,) + rest[i - 1:])


def build_Z(spec: ColourSpec, q: int, H: MixedGraph) -> MixedGraph:
    """The q-partite target; ``labels`` holds the ZVertex of each id."""
    c = spec.c
    if q < 1:
        raise GraphError("q must be >= 1")
    if H.spec != spec or H.p != 2 * c:
        raise GraphError("H does not match the colour spec")
    verts = list(z_vertices(c, q))
    N = len(verts)
    idx = np.array([v.index for v in verts])
    coords = np.array([v.coords for v in verts]).reshape(N, q)
    hc = H.matrix
    code = np.zeros((N, N), dtype=np.int64)
    for i in range(1, q + 1):
        for j in range(i + 1, q + 1):
            vi = np.flatnonzero(idx == i)
            wj = np.flatnonzero(idx == j)
            s = coords[vi, j - 1] - 1
            t = coords[wj, i - 1] - 1
            block = hc[np.ix_(s, c + t)]
            code[np.ix_(vi, wj)] = block
            code[np.ix_(wj, vi)] = hc[np.ix_(c + t, s)]
    return MixedGraph(spec, N, tuple(map(tuple, code.tolist())), labels=tuple(verts))


# -- Property P_{a,b} --------------------------------------------------------

@dataclass(frozen=True)
class PropertyReport:
    a: int
    b: int
    holds: bool
    counterexample: tuple[tuple[int, ...], tuple[int, ...], int] | None = None
    mode: str = "exhaustive"
    trials: int | None = None
    seed: int | None = None
    min_count: int | None = None

    def line(self) -> str:
        verdict = "holds" if self.holds else "fails"
        if self.mode == "sampled" and self.holds:
            verdict = "no-violation-found"
        out = f"P_{{{self.a},{self.b}}}\t{self.mode}\t{verdict}"
        if self.counterexample:
            X, L, cnt = self.counterexample
            out += f"\tX={list(X)}\tL={list(L)}\tfound={cnt}"
        return out


def complete_subsets(G: MixedGraph, size: int) -> Iterator[tuple[int, ...]]:
    """Cliques of the underlying graph of exactly ``size`` vertices, ascending."""
    if size == 0:
        yield ()
        return
    masks = G.nbr_mask

    def grow(clique: tuple[int, ...], cand: int):
        if len(clique) == size:
            yield clique
            return
        while cand:
            low = cand & -cand
            v = low.bit_length() - 1
            cand ^= low
            yield from grow(clique + (v,), cand & masks[v])

    yield from grow((), (1 << G.p) - 1)


def _tuple_counts(M: np.ndarray, X: Sequence[int], c: int) -> np.ndarray:
    """Counts of each code tuple in ``{1..c}^|X|`` (row-major, base c) over all x."""
    sub = M[:, list(X)]
    ok = np.all(sub > 0, axis=1)
    powers = c ** np.arange(len(X) - 1, -1, -1)
    keys = (sub[ok] - 1) @ powers
    return np.bincount(keys, minlength=c ** len(X))


def _decode(key: int, length: int, c: int) -> tuple[int, ...]:
    out = []
    for _ in range(length):
        key, r = divmod(key, c)
        out.append(r + 1)
    return tuple(reversed(out))


def has_property_P(G: MixedGraph, a: int, b: int, mode: str = "exhaustive",
                   trials: int = 10_000, seed: int = 0) -> PropertyReport:
    """Check that every clique X with |X| <= a and every code tuple L over X
    is realised by at least ``b`` vertices.

    In ``sampled`` mode ``trials`` cliques of each size are drawn (by
    rejection, so uniformly among cliques) and every tuple over each is
    checked; a clean result there is evidence, not a certificate.
    """
    if a < 0 or b < 1:
        raise GraphError("need a >= 0 and b >= 1")
    c = G.spec.c
    M = G.matrix
    if G.p < b:
        return PropertyReport(a, b, False, ((), (), G.p), mode, min_count=G.p)
    best = G.p
    if mode == "exhaustive":
        for ell in range(1, a + 1):
            cliques = complete_subsets(G, ell)
            while True:
                chunk = list(itertools.islice(cliques, 4096))
                if not chunk:
                    break
                counts = _batch_counts(M, np.array(chunk), c)
                mins = counts.min(axis=1)
                best = min(best, int(mins.min()))
                bad = np.flatnonzero(mins < b)
                if bad.size:
                    r = int(bad[0])
                    key = int(np.argmax(counts[r] < b))
                    return PropertyReport(a, b, False, (chunk[r], _decode(key, ell, c), int(counts[r, key])),
                                          mode, min_count=int(mins[r]))
        return PropertyReport(a, b, True, None, mode, min_count=best)
    if mode != "sampled":
        raise GraphError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed)
    for ell in range(1, min(a, G.p) + 1):
        found = 0
        attempts = 0
        while found < trials and attempts < 50 * trials:
            batch = min(4096, trials - found)
            Xs = np.argsort(rng.random((batch, G.p)), axis=1)[:, :ell]
            attempts += batch
            for r in range(ell):
                for s in range(r + 1, ell):
                    Xs = Xs[M[Xs[:, r], Xs[:, s]] > 0]
            if not len(Xs):
                continue
            Xs = Xs[: trials - found]
            found += len(Xs)
            bad = _sampled_violation(M, Xs, c, b)
            if bad is not None:
                X, key, cnt, lo = bad
                return PropertyReport(a, b, False, (X, _decode(key, ell, c), cnt), mode,
                                      trials, seed, min_count=lo)
            best = min(best, _sampled_min(M, Xs, c))
    return PropertyReport(a, b, True, None, mode, trials, seed, min_count=best)


def _batch_counts(M: np.ndarray, Xs: np.ndarray, c: int) -> np.ndarray:
    B, ell = Xs.shape
    sub = M[:, Xs]  # (p, B, ell)
    ok = np.all(sub > 0, axis=2)
    powers = c ** np.arange(ell - 1, -1, -1)
    keys = (sub - 1) @ powers  # (p, B)
    width = c ** ell
    flat = (keys + width * np.arange(B)[None, :])[ok]
    return np.bincount(flat, minlength=B * width).reshape(B, width)


def _sampled_violation(M, Xs, c, b):
    counts = _batch_counts(M, Xs, c)
    bad_rows = np.flatnonzero(counts.min(axis=1) < b)
    if not bad_rows.size:
        return None
    r = int(bad_rows[0])
    key = int(np.argmax(counts[r] < b))
    X = tuple(sorted(int(v) for v in Xs[r]))
    # re-key against the sorted order so the reported tuple matches X
    fixed = _tuple_counts(M, X, c)
    key = int(np.argmax(fixed < b))
    return X, key, int(fixed[key]), int(counts.min())


def _sampled_min(M, Xs, c) -> int:
    return int(_batch_counts(M, Xs, c).min())


# -- constructive colouring --------------------------------------------------

def _extension_at(Z: MixedGraph, lookup: dict[ZVertex, int], q: int,
                  constraints: list[tuple[int, int]], i: int) -> int | None:
    """Lexicographically least Z vertex of index ``i`` whose code to ``z`` is
    ``x`` for every ``(z, x)`` in ``constraints``.

    The code to ``z`` depends only on our coordinate at ``z``'s index and on
    ``z``'s coordinate at ``i``, so each constraint narrows one coordinate.
    """
    labels = Z.labels
    zcode = Z.code
    allowed: list[set[int] | None] = [None] * q
    for z, x in constraints:
        j = labels[z].index
        if j == i:
            return None
        base = [1] * q
        base[i - 1] = 0
        ok = set()
        for s in range(1, Z.spec.c + 1):
            base[j - 1] = s
            if zcode[lookup[ZVertex(i, tuple(base))]][z] == x:
                ok.add(s)
        prev = allowed[j - 1]
        allowed[j - 1] = ok if prev is None else prev & ok
        if not allowed[j - 1]:
            return None
    coords = tuple(0 if pos == i - 1 else (min(a) if a else 1) for pos, a in enumerate(allowed))
    return lookup[ZVertex(i, coords)]


def _distinct_representatives(options: list[list[int]]) -> list[int] | None:
    """Pick pairwise distinct entries, one per option list (augmenting paths).

    Earlier entries of each list are preferred, so a list headed by the
    current value keeps it whenever possible.
    """
    owner: dict[int, int] = {}

    def augment(r: int, seen: set[int]) -> bool:
        for i in options[r]:
            if i in seen:
                continue
            seen.add(i)
            if i not in owner or augment(owner[i], seen):
                owner[i] = r
                return True
        return False

    for r in range(len(options)):
        if not augment(r, set()):
            return None
    chosen = [0] * len(options)
    for i, r in owner.items():
        chosen[r] = i
    return chosen


def universal_colouring(G: MixedGraph, Z: MixedGraph, q: int, k: int) -> VertexMap:
    """Map a graph of maximum degree <= k into Z (q = 2k-1) inductively.

    Vertices are inserted in id order. Before inserting ``x``, the placed
    neighbours of ``x`` are moved so their images have pairwise distinct
    indices: each neighbour lists the indices it can be re-extended to, and
    a system of distinct representatives picks one per neighbour. Their
    images then form a clique of Z, so ``x`` extends. ``x`` prefers an index
    not used by placed vertices it shares an unplaced neighbour with. If
    any step has no candidate, a complete backtracking search over Z is
    used instead.
    """
    if k < 2 or q != 2 * k - 1:
        raise GraphError("need k >= 2 and q = 2k - 1")
    if max_degree(G) > k:
        raise GraphError(f"max degree {max_degree(G)} exceeds k = {k}")
    if G.spec != Z.spec or not Z.labels or not isinstance(Z.labels[0], ZVertex):
        raise GraphError("Z must come from build_Z with the same colour spec")
    if len(Z.labels[0].coords) != q:
        raise GraphError(f"Z was built for q = {len(Z.labels[0].coords)}, not {q}")
    lookup = {v: i for i, v in enumerate(Z.labels)}
    image = _insert_all(G, Z, lookup, q)
    if image is not None:
        f = VertexMap(G, Z, tuple(image))
        if is_homomorphism(f):
            return f
    log.info("repair failed; falling back to complete search over Z")
    f = find_homomorphism(G, Z)
    if f is None or not is_homomorphism(f):
        raise UniversalityViolation(G, Z, k)
    return f


def _insert_all(G: MixedGraph, Z: MixedGraph, lookup: dict[ZVertex, int], q: int) -> list[int] | None:
    labels = Z.labels
    gcode = G.code
    image = [-1] * G.p
    indices = range(1, q + 1)

    def constraints(v: int) -> list[tuple[int, int]]:
        return [(image[u], gcode[v][u]) for u in G.neighbours[v] if image[u] >= 0]

    for x in range(G.p):
        placed = [u for u in G.neighbours[x] if u < x]
        current = [labels[image[v]].index for v in placed]
        if len(set(current)) < len(placed):
            options = []
            for v, cur in zip(placed, current):
                cons = constraints(v)
                options.append([cur] + [i for i in indices
                                        if i != cur and _extension_at(Z, lookup, q, cons, i) is not None])
            chosen = _distinct_representatives(options)
            if chosen is None:
                return None
            for v, cur, i in zip(placed, current, chosen):
                if i != cur:
                    new = _extension_at(Z, lookup, q, constraints(v), i)
                    if new is None:
                        return None
                    image[v] = new
        soft = {labels[image[z]].index for y in G.neighbours[x] if y > x
                for z in G.neighbours[y] if z < x}
        cons = constraints(x)
        new = None
        for i in sorted(indices, key=lambda i: (i in soft, i)):
            new = _extension_at(Z, lookup, q, cons, i)
            if new is not None:
                break
        if new is None:
            return None
        image[x] = new
    return image
