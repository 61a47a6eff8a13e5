"""Random universal targets: exact tail probabilities, target search, greedy colouring.

A random complete target on ``t`` vertices gets an independent uniform code
on every pair. Layer ``i`` of the target property asks that every ``i``-set
``X`` and every code tuple over ``X`` be realised by more than
``(k - i)(k - 1)`` vertices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import mpmath
import numpy as np

from .constructive import PropertyReport, has_property_P
from .graph import ColourSpec, GraphError, MixedGraph, is_complete_subgraph, max_degree, random_complete
from .solver import VertexMap, is_homomorphism

DEFAULT_BUDGET = 10**10
EXACT_T_LIMIT = 5000


@dataclass(frozen=True)
class LemmaParams:
    k: int
    c: int
    t: int = 0

    def __post_init__(self):
        if self.k < 1 or self.c < 1:
            raise GraphError("need k >= 1 and c >= 1")
        if self.t == 0:
            object.__setattr__(self, "t", self.k ** 2 * self.c ** (self.k + 1))
        if self.t < self.k:
            raise GraphError("need t >= k")


def witness_threshold(k: int, i: int) -> int:
    """Witnesses needed on layer ``i``: ``(k - i)(k - 1) + 1``."""
    return (k - i) * (k - 1) + 1


def _logsumexp(logs: list[float]) -> float:
    top = max(logs)
    if top == -math.inf:
        return -math.inf
    return top + math.log(math.fsum(math.exp(x - top) for x in logs))


def log_tail_probability(params: LemmaParams, i: int) -> float:
    """Natural log of ``P(Bin(t - i, c^-i) <= (k - i)(k - 1))``."""
    k, c, t = params.k, params.c, params.t
    if not 1 <= i <= k or t <= i:
        raise GraphError("need 1 <= i <= k and t > i")
    trials = t - i
    cutoff = min((k - i) * (k - 1), trials)
    lp = -i * math.log(c)
    lq = math.log1p(-c ** -i) if c ** i > 1 else -math.inf
    terms = []
    for j in range(cutoff + 1):
        rest = trials - j
        fail = 0.0 if rest == 0 else rest * lq
        terms.append(math.log(math.comb(trials, j)) + j * lp + fail)
    return _logsumexp(terms)


def tail_probability(params: LemmaParams, i: int, backend: str = "float"):
    """Probability that a fixed (X, b) has too few witnesses.

    ``backend`` is ``"float"`` (log-space, compensated sum), ``"mpmath"``
    (50 significant digits) or ``"exact"`` (a ``Fraction``).
    """
    if backend == "float":
        return math.exp(log_tail_probability(params, i))
    k, c, t = params.k, params.c, params.t
    if not 1 <= i <= k or t <= i:
        raise GraphError("need 1 <= i <= k and t > i")
    trials = t - i
    cutoff = min((k - i) * (k - 1), trials)
    if backend == "exact":
        p = Fraction(1, c ** i)
        return sum(math.comb(trials, j) * p ** j * (1 - p) ** (trials - j) for j in range(cutoff + 1))
    if backend == "mpmath":
        with mpmath.workdps(50):
            p = mpmath.mpf(1) / mpmath.mpf(c) ** i
            q = 1 - p
            return mpmath.fsum(mpmath.mpf(math.comb(trials, j)) * p ** j * q ** (trials - j)
                               for j in range(cutoff + 1))
    raise GraphError(f"unknown backend {backend!r}")


def log_union_bound(params: LemmaParams) -> float:
    k, c, t = params.k, params.c, params.t
    logs = [math.log(math.comb(t, i)) + i * math.log(c) + log_tail_probability(params, i)
            for i in range(1, k + 1)]
    return _logsumexp(logs)


def union_bound(params: LemmaParams, backend: str = "float"):
    """Sum over layers of (number of (X, b) pairs) x (exact tail probability)."""
    k, c, t = params.k, params.c, params.t
    if backend == "float":
        return math.exp(log_union_bound(params))
    if backend == "exact":
        return sum(math.comb(t, i) * c ** i * tail_probability(params, i, "exact")
                   for i in range(1, k + 1))
    if backend == "mpmath":
        with mpmath.workdps(50):
            return mpmath.fsum(mpmath.mpf(math.comb(t, i) * c ** i) * tail_probability(params, i, "mpmath")
                               for i in range(1, k + 1))
    raise GraphError(f"unknown backend {backend!r}")


def chained_bounds(params: LemmaParams) -> dict[str, float]:
    """Natural logs of the successive closed-form upper bounds on the union bound.

    ``terms``: sum_i C(t,i) c^i exp(-t c^-i) t^((k-i)(k-1)+1), i = 1..k
    ``power``: c^k sum_i exp(-t c^-i) t^((k-i)(k-1)+1+i), i = 0..k
    ``final``: (c/(c-1)) c^k exp(-t c^-k) t^(k+1)
    """
    k, c, t = params.k, params.c, params.t
    lc, lt = math.log(c), math.log(t)
    terms = [math.log(math.comb(t, i)) + i * lc - t * c ** -i + (witness_threshold(k, i)) * lt
             for i in range(1, k + 1)]
    power = [k * lc - t * c ** -i + (witness_threshold(k, i) + i) * lt for i in range(0, k + 1)]
    out = {"terms": _logsumexp(terms), "power": _logsumexp(power)}
    if c >= 2:
        out["final"] = math.log(c / (c - 1)) + k * lc - t * c ** -k + (k + 1) * lt
    return out


def lemma_inequalities(k: int, c: int) -> tuple[float, float]:
    """Left-minus-right margins of the two log inequalities (positive = holds).

    first:  k^2 (c-1) c  >  (2k-4) ln k + ((k+1)(k-2)+1) ln c
    second: ln(c-1) + c k^2  >  (2k+2) ln k + (k+1)(k+2) ln c
    """
    if k < 1 or c < 2:
        raise GraphError("need k >= 1 and c >= 2")
    lk, lc = math.log(k), math.log(c)
    m1 = k * k * (c - 1) * c - ((2 * k - 4) * lk + ((k + 1) * (k - 2) + 1) * lc)
    m2 = (math.log(c - 1) + c * k * k) - ((2 * k + 2) * lk + (k + 1) * (k + 2) * lc)
    return m1, m2


@dataclass
class ProbabilityLedger:
    params: LemmaParams
    tails: list[float]
    log_tails: list[float]
    union_bound: float
    log_union_bound: float
    chained: dict[str, float]
    margin1: float | None
    margin2: float | None
    exact_union_bound: Fraction | None = None

    def rows(self) -> list[tuple[str, str]]:
        p = self.params
        out = [("k", str(p.k)), ("c", str(p.c)), ("t", str(p.t))]
        for i, (tv, lv) in enumerate(zip(self.tails, self.log_tails), 1):
            out.append((f"tail_{i}", f"{tv:.15g}"))
            out.append((f"log10_tail_{i}", f"{lv / math.log(10):.15g}"))
        out.append(("union_bound", f"{self.union_bound:.15g}"))
        out.append(("log10_union_bound", f"{self.log_union_bound / math.log(10):.15g}"))
        for name, lv in self.chained.items():
            out.append((f"log10_chain_{name}", f"{lv / math.log(10):.15g}"))
        if self.exact_union_bound is not None:
            out.append(("exact_union_bound", f"{float(self.exact_union_bound):.15g}"))
        if self.margin1 is not None:
            out.append(("ineq1_margin", f"{self.margin1:.15g}"))
            out.append(("ineq2_margin", f"{self.margin2:.15g}"))
        return out


def probability_ledger(params: LemmaParams) -> ProbabilityLedger:
    logs = [log_tail_probability(params, i) for i in range(1, params.k + 1)]
    lub = log_union_bound(params)
    exact = union_bound(params, "exact") if params.t <= EXACT_T_LIMIT else None
    margins = lemma_inequalities(params.k, params.c) if params.c >= 2 else (None, None)
    return ProbabilityLedger(
        params=params,
        tails=[math.exp(x) for x in logs],
        log_tails=logs,
        union_bound=math.exp(lub),
        log_union_bound=lub,
        chained=chained_bounds(params),
        margin1=margins[0],
        margin2=margins[1],
        exact_union_bound=exact,
    )


# -- layered property and target search -------------------------------------

def layered_property_check(H: MixedGraph, k: int, mode: str = "auto", budget: int = DEFAULT_BUDGET,
                           trials: int = 10_000, seed: int = 0) -> list[PropertyReport]:
    """One report per layer ``i = 1..k`` for P_{i, (k-i)(k-1)+1}.

    ``auto`` checks a layer exhaustively when C(t,i) c^i t <= ``budget`` and
    samples it otherwise.
    """
    if not is_complete_subgraph(H, range(H.p)):
        raise GraphError("target must be complete")
    t, c = H.p, H.spec.c
    reports = []
    for i in range(1, k + 1):
        layer_mode = mode
        if mode == "auto":
            layer_mode = "exhaustive" if math.comb(t, i) * c ** i * t <= budget else "sampled"
        reports.append(has_property_P(H, i, witness_threshold(k, i), layer_mode, trials, seed + i))
    return reports


class FoundTarget(NamedTuple):
    graph: MixedGraph
    reports: list[PropertyReport]
    trial: int
    trial_seed: int


def trial_seed(seed: int, trial: int) -> int:
    return int(np.random.SeedSequence([seed, trial]).generate_state(1)[0])


def find_target(spec: ColourSpec, k: int, t: int, max_trials: int, seed: int,
                budget: int = DEFAULT_BUDGET, trials: int = 10_000) -> FoundTarget | None:
    """Rejection-sample complete targets until one passes every layer.

    Returns ``None`` at once when ``t`` is too small for the first layer to
    hold by pigeonhole (each of the ``c`` codes needs ``(k-1)^2 + 1``
    witnesses among the other ``t - 1`` vertices).
    """
    if t < k:
        raise GraphError("need t >= k")
    if t - 1 < spec.c * witness_threshold(k, 1):
        return None
    for trial in range(max_trials):
        ts = trial_seed(seed, trial)
        H = random_complete(spec, t, ts)
        reports = layered_property_check(H, k, "auto", budget, trials, ts)
        if all(r.holds for r in reports):
            return FoundTarget(H, reports, trial, ts)
    return None


# -- greedy colouring --------------------------------------------------------

@dataclass(frozen=True)
class GreedyStep:
    vertex: int
    W: tuple[int, ...]
    b: tuple[int, ...]
    x_size: int
    Y: tuple[int, ...]
    Z: tuple[int, ...]
    image: int | None


@dataclass
class GreedyTrace:
    order: tuple[int, ...]
    steps: list[GreedyStep] = field(default_factory=list)
    image: tuple[int, ...] | None = None
    stuck_at: int | None = None
    source: MixedGraph | None = None
    target: MixedGraph | None = None

    @property
    def ok(self) -> bool:
        return self.image is not None

    def vertex_map(self) -> VertexMap:
        if self.image is None:
            raise GraphError(f"greedy colouring got stuck at step {self.stuck_at}")
        return VertexMap(self.source, self.target, self.image)


def greedy_colouring(G: MixedGraph, H: MixedGraph, k: int) -> GreedyTrace:
    """Place vertices in id order, each on the least-id admissible target vertex.

    For the vertex being placed: ``W`` are its placed neighbours, ``b`` the
    codes it needs towards them, ``X`` the target vertices outside ``f(W)``
    showing ``b`` towards ``f(W)``, ``Y`` its unplaced neighbours and ``Z``
    the placed vertices adjacent to something in ``Y``. The image is the
    least vertex of ``X - f(Z)``, which keeps the images of any two
    vertices with a common unplaced neighbour apart.
    """
    if G.spec != H.spec:
        raise GraphError("colour specs differ")
    if max_degree(G) > k:
        raise GraphError(f"max degree {max_degree(G)} exceeds k = {k}")
    if not is_complete_subgraph(H, range(H.p)):
        raise GraphError("target must be complete")
    order = tuple(range(G.p))
    trace = GreedyTrace(order, source=G, target=H)
    M = H.matrix
    img = [-1] * G.p
    pos = {v: s for s, v in enumerate(order)}
    for step, v in enumerate(order):
        nb = G.neighbours[v]
        W = tuple(u for u in nb if pos[u] < step)
        b = tuple(G.code[v][u] for u in W)
        fW = [img[u] for u in W]
        if len(W):
            mask = np.all(M[:, fW] == np.array(b), axis=1)
        else:
            mask = np.ones(H.p, dtype=bool)
        mask[fW] = False
        Y = tuple(u for u in nb if pos[u] > step)
        Zs = tuple(sorted({z for y in Y for z in G.neighbours[y] if pos[z] < step}))
        cand = mask.copy()
        cand[[img[z] for z in Zs]] = False
        chosen = int(np.argmax(cand)) if cand.any() else None
        trace.steps.append(GreedyStep(v, W, b, int(mask.sum()), Y, Zs, chosen))
        if chosen is None:
            trace.stuck_at = step
            return trace
        img[v] = chosen
    trace.image = tuple(img)
    return trace


def unplaced_neighbour_collisions(G: MixedGraph, trace: GreedyTrace) -> list[tuple[int, int, int]]:
    """Triples ``(u, w, y)``: ``u`` and ``w`` were placed before their common
    neighbour ``y`` yet share an image. Empty whenever the greedy rule held."""
    if trace.image is None:
        raise GraphError("trace has no map")
    pos = {v: s for s, v in enumerate(trace.order)}
    out = []
    for y in range(G.p):
        seen: dict[int, int] = {}
        for u in G.neighbours[y]:
            if pos[u] < pos[y]:
                h = trace.image[u]
                if h in seen:
                    out.append((seen[h], u, y))
                seen.setdefault(h, u)
    return out


def common_neighbour_collisions(G: MixedGraph, image) -> list[tuple[int, int, int]]:
    """Triples ``(u, w, y)`` with ``y`` adjacent to both and ``f(u) == f(w)``."""
    out = []
    for y in range(G.p):
        seen: dict[int, int] = {}
        for u in G.neighbours[y]:
            h = image[u]
            if h in seen:
                out.append((seen[h], u, y))
            seen.setdefault(h, u)
    return out


def greedy_valid(G: MixedGraph, H: MixedGraph, trace: GreedyTrace) -> bool:
    return trace.ok and is_homomorphism(trace.vertex_map()) and not unplaced_neighbour_collisions(G, trace)
