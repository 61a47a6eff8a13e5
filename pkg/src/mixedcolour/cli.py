"""Command-line interface: ``mixedcolour <subcommand> ...``.

Exit codes: 0 success, 1 when the answer is none/false, 2 on usage or
input-format errors. Results go to stdout (graph text format or TSV),
diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .constructive import (build_H, build_Z, cyclic_factorization, has_property_P, parse_factorization,
                           serialize_factorization, universal_colouring)
from .experiments import EXPERIMENTS
from .graph import (ColourSpec, GraphError, GraphFormatError, max_degree, parse, random_bounded_degree, random_complete,
                    read_graph, serialize)
from .probabilistic import (DEFAULT_BUDGET, LemmaParams, find_target, greedy_colouring, layered_property_check,
                            probability_ledger, unplaced_neighbour_collisions)
from .solver import (Partition, QuotientConflict, VertexMap, bounds, chromatic_number, find_homomorphism,
                     is_homomorphism, quotient)

log = logging.getLogger("mixedcolour")


class UsageError(Exception):
    pass


def _spec(args) -> ColourSpec:
    try:
        return ColourSpec(args.m, args.n)
    except GraphError as e:
        raise UsageError(str(e)) from None


def _factorization(args, spec: ColourSpec):
    if getattr(args, "factorization", None):
        fac = parse_factorization(Path(args.factorization).read_text(encoding="utf-8"))
        if fac.c != spec.c:
            raise UsageError(f"factorization has size {fac.c}, need m+2n = {spec.c}")
        return fac, "file"
    return cyclic_factorization(spec.c), "cyclic"


def _tsv(rows) -> str:
    return "".join("\t".join(map(str, r)) + "\n" for r in rows)


def _map_lines(image) -> str:
    return "".join(f"map {v} {h}\n" for v, h in enumerate(image))


# -- subcommands -------------------------------------------------------------

def cmd_chi(args, out) -> int:
    G = read_graph(args.graph)
    if args.verify:
        return _verify_chi(G, Path(args.verify).read_text(encoding="utf-8"), out)
    res = chromatic_number(G)
    out.write(f"chi {res.chi}\n")
    out.write(serialize(res.witness_target))
    out.write(_map_lines(res.witness_map.image))
    return 0


def split_witness(text: str):
    """Split ``chi``-style output into (k, quotient text, block list)."""
    k = None
    graph_lines, blocks = [], {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        toks = raw.split("#", 1)[0].split()
        # blank out non-graph lines so parse errors keep the file's line numbers
        try:
            if toks and toks[0] == "chi" and k is None:
                k = int(toks[1])
                raw = ""
            elif toks and toks[0] == "map":
                blocks[int(toks[1])] = int(toks[2])
                raw = ""
        except (IndexError, ValueError):
            raise GraphFormatError(lineno, f"malformed '{toks[0]}' line") from None
        graph_lines.append(raw)
    if k is None:
        raise GraphError("witness lacks a 'chi <k>' line")
    return k, "\n".join(graph_lines), [blocks[v] for v in sorted(blocks)]


def _verify_chi(G, text: str, out) -> int:
    k, gtext, image = split_witness(text)
    Q = parse(gtext)
    if len(image) != G.p or Q.p != k:
        out.write("invalid\tsize mismatch\n")
        return 1
    f = VertexMap(G, Q, tuple(image))
    if not is_homomorphism(f):
        out.write("invalid\tnot a homomorphism\n")
        return 1
    try:
        quotient(G, Partition.from_labels(image))
    except QuotientConflict as e:
        out.write(f"invalid\t{e}\n")
        return 1
    out.write(f"valid\tchi_witness={k}\n")
    return 0


def cmd_hom(args, out) -> int:
    G, H = read_graph(args.source), read_graph(args.target)
    if G.spec != H.spec:
        raise UsageError(f"colour specs differ: {G.spec} vs {H.spec}")
    f = find_homomorphism(G, H)
    if f is None:
        out.write("none\n")
        return 1
    out.write(_map_lines(f.image))
    return 0


def cmd_build_h(args, out) -> int:
    spec = _spec(args)
    fac, kind = _factorization(args, spec)
    H = build_H(spec, fac)
    out.write(serialize(H, [f"H m={spec.m} n={spec.n} factorization={kind}",
                            "A = 0..c-1, B = c..2c-1"]))
    return 0


def cmd_build_z(args, out) -> int:
    spec = _spec(args)
    if args.q < 1:
        raise UsageError("q must be >= 1")
    fac, kind = _factorization(args, spec)
    Z = build_Z(spec, args.q, build_H(spec, fac))
    comments = [f"Z m={spec.m} n={spec.n} q={args.q} factorization={kind}"]
    comments += [f"factor {i} {' '.join(map(str, p))}" for i, p in enumerate(fac.perms)]
    if args.labels:
        comments += [f"vertex {i} {v}" for i, v in enumerate(Z.labels)]
    out.write(serialize(Z, comments))
    return 0


def cmd_check_p(args, out) -> int:
    G = read_graph(args.graph)
    if args.mode == "sampled" and args.seed is None:
        raise UsageError("sampled mode needs --seed")
    rep = has_property_P(G, args.a, args.b, args.mode, args.trials, args.seed or 0)
    header = f"# mode={rep.mode}" + (f" trials={args.trials} seed={args.seed}" if rep.mode == "sampled" else "")
    out.write(header + "\n" + rep.line() + "\n")
    return 0 if rep.holds else 1


def cmd_universal(args, out) -> int:
    G = read_graph(args.graph)
    k = args.k if args.k is not None else max(2, max_degree(G))
    if k < 2:
        raise UsageError("k must be >= 2")
    if max_degree(G) > k:
        raise UsageError(f"max degree {max_degree(G)} exceeds k = {k}")
    q = 2 * k - 1
    fac, kind = _factorization(args, G.spec)
    Z = build_Z(G.spec, q, build_H(G.spec, fac))
    f = universal_colouring(G, Z, q, k)
    out.write(f"# target Z m={G.spec.m} n={G.spec.n} q={q} vertices={Z.p} factorization={kind}\n")
    for v, h in enumerate(f.image):
        out.write(f"map {v} {h}\t{Z.labels[h]}\n")
    return 0


def cmd_greedy(args, out) -> int:
    G, H = read_graph(args.graph), read_graph(args.target)
    if G.spec != H.spec:
        raise UsageError(f"colour specs differ: {G.spec} vs {H.spec}")
    k = args.k if args.k is not None else max_degree(G)
    if k <= 3:
        log.info("k <= 3: the constructive family (see 'universal') gives the smaller bound")
    trace = greedy_colouring(G, H, k)
    out.write("step\tvertex\tW\tb\t|X|\tY\tZ\timage\n")
    for s, st in enumerate(trace.steps):
        out.write(f"{s}\t{st.vertex}\t{list(st.W)}\t{list(st.b)}\t{st.x_size}\t{list(st.Y)}\t"
                  f"{list(st.Z)}\t{'stuck' if st.image is None else st.image}\n")
    if not trace.ok:
        return 1
    valid = is_homomorphism(trace.vertex_map()) and not unplaced_neighbour_collisions(G, trace)
    out.write(_map_lines(trace.image))
    return 0 if valid else 1


def cmd_find_target(args, out) -> int:
    spec = _spec(args)
    if args.k < 1 or args.t < args.k:
        raise UsageError("need k >= 1 and t >= k")
    found = find_target(spec, args.k, args.t, args.trials, args.seed, args.budget, args.samples)
    if found is None:
        sys.stderr.write(f"no target found in {args.trials} trials\n")
        return 1
    comments = [f"target m={spec.m} n={spec.n} k={args.k} t={args.t} seed={args.seed} "
                f"trial={found.trial} trial_seed={found.trial_seed}"]
    comments += [f"layer {r.line()}" for r in found.reports]
    text = serialize(found.graph, comments)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        out.write("\n".join(f"# {c}" for c in comments) + "\n")
    else:
        out.write(text)
    return 0


def cmd_prob(args, out) -> int:
    try:
        params = LemmaParams(args.k, args.c, args.t or 0)
    except GraphError as e:
        raise UsageError(str(e)) from None
    out.write(_tsv(probability_ledger(params).rows()))
    return 0


def cmd_bounds(args, out) -> int:
    spec = _spec(args)
    if args.delta < 0:
        raise UsageError("delta must be >= 0")
    table = bounds(args.delta, spec)
    rows = table.rows()
    route = "trivial" if args.delta <= 1 else ("constructive" if args.delta <= 3 else "probabilistic")
    rows.append(("ksz_proof_route", route))
    out.write(_tsv(rows))
    return 0


def cmd_gen(args, out) -> int:
    spec = _spec(args)
    if args.kind == "bounded":
        G = random_bounded_degree(spec, args.p, args.max_degree, args.prob, args.seed)
        note = f"bounded p={args.p} max_degree={args.max_degree} prob={args.prob} seed={args.seed}"
    else:
        G = random_complete(spec, args.p, args.seed)
        note = f"complete t={args.p} seed={args.seed}"
    out.write(serialize(G, [note]))
    return 0


def cmd_layers(args, out) -> int:
    H = read_graph(args.graph)
    reports = layered_property_check(H, args.k, args.mode, args.budget, args.samples, args.seed)
    out.write(f"# k={args.k} seed={args.seed}\n")
    for r in reports:
        out.write(r.line() + "\n")
    return 0 if all(r.holds for r in reports) else 1


def cmd_factorization(args, out) -> int:
    if args.c < 1:
        raise UsageError("c must be >= 1")
    out.write(serialize_factorization(cyclic_factorization(args.c)))
    return 0


def cmd_repro(args, out) -> int:
    if args.list or not args.name:
        out.write("".join(f"{n}\n" for n in EXPERIMENTS))
        return 0
    names = list(EXPERIMENTS) if args.name == "all" else [args.name]
    ok = True
    for name in names:
        if name not in EXPERIMENTS:
            raise UsageError(f"unknown experiment {name!r}; try --list")
        res = EXPERIMENTS[name]()
        for line in res.lines:
            out.write(f"{name}\t{line}\n")
        out.write(f"{name}\t{'PASS' if res.passed else 'FAIL'}\n")
        sys.stderr.write(f"{name}: {res.elapsed:.2f}s\n")
        ok &= res.passed
    return 0 if ok else 1


# -- parser ------------------------------------------------------------------

def _add_spec(p):
    p.add_argument("-m", type=int, required=True, help="number of edge colours")
    p.add_argument("-n", type=int, required=True, help="number of arc colours")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mixedcolour", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("chi", help="exact mixed chromatic number with witness")
    p.add_argument("graph")
    p.add_argument("--verify", metavar="WITNESS", help="check a witness produced by 'chi'")
    p.set_defaults(func=cmd_chi)

    p = sub.add_parser("hom", help="find a homomorphism between two graphs")
    p.add_argument("source")
    p.add_argument("target")
    p.set_defaults(func=cmd_hom)

    p = sub.add_parser("build-h", help="emit the coloured K_{c,c}")
    _add_spec(p)
    p.add_argument("--factorization", metavar="FILE")
    p.set_defaults(func=cmd_build_h)

    p = sub.add_parser("build-z", help="emit the q-partite universal target")
    _add_spec(p)
    p.add_argument("-q", type=int, required=True)
    p.add_argument("--factorization", metavar="FILE")
    p.add_argument("--labels", action="store_true", help="list the structured vertex names as comments")
    p.set_defaults(func=cmd_build_z)

    p = sub.add_parser("check-p", help="report on property P_{a,b}")
    p.add_argument("graph")
    p.add_argument("-a", type=int, required=True)
    p.add_argument("-b", type=int, required=True)
    p.add_argument("--mode", choices=["exhaustive", "sampled"], default="exhaustive")
    p.add_argument("--trials", type=int, default=10_000, help="cliques drawn per size (sampled)")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_check_p)

    p = sub.add_parser("universal", help="constructive colouring into Z with q = 2k-1")
    p.add_argument("graph")
    p.add_argument("-k", type=int)
    p.add_argument("--factorization", metavar="FILE")
    p.set_defaults(func=cmd_universal)

    p = sub.add_parser("greedy", help="greedy colouring against a target file")
    p.add_argument("graph")
    p.add_argument("target")
    p.add_argument("-k", type=int)
    p.set_defaults(func=cmd_greedy)

    p = sub.add_parser("find-target", help="rejection-sample a target with the layered property")
    _add_spec(p)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("-t", type=int, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--samples", type=int, default=10_000, help="cliques per size for sampled layers")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_find_target)

    p = sub.add_parser("layers", help="check the layered property of a complete target")
    p.add_argument("graph")
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--mode", choices=["auto", "exhaustive", "sampled"], default="auto")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_layers)

    p = sub.add_parser("prob", help="tail probabilities, union bound and inequality margins")
    p.add_argument("-k", type=int, required=True)
    p.add_argument("-c", type=int, required=True)
    p.add_argument("-t", type=int, help="target order (default k^2 c^(k+1))")
    p.set_defaults(func=cmd_prob)

    p = sub.add_parser("bounds", help="closed-form bounds for given delta")
    p.add_argument("--delta", type=int, required=True)
    _add_spec(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("gen", help="random instance generators")
    p.add_argument("kind", choices=["bounded", "complete"])
    _add_spec(p)
    p.add_argument("-p", type=int, required=True, help="number of vertices")
    p.add_argument("--max-degree", type=int, default=3)
    p.add_argument("--prob", type=float, default=0.5)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("repro", help="run a named acceptance experiment")
    p.add_argument("name", nargs="?", help="experiment name or 'all'")
    p.add_argument("--list", action="store_true")
    p.set_defaults(func=cmd_repro)

    p = sub.add_parser("factorization", help="emit the cyclic 1-factorization of K_{c,c}")
    p.add_argument("-c", type=int, required=True)
    p.set_defaults(func=cmd_factorization)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(message)s")
    try:
        return args.func(args, out)
    except (UsageError, GraphError, OSError) as e:
        sys.stderr.write(f"error: {e}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
