"""Command-line benchmark driver.  CSV goes to stdout, diagnostics to stderr."""

from __future__ import annotations

import argparse
import csv
import statistics
import sys
from typing import Optional, Sequence

from .errors import BadSpec, ParseError
from .workloads import (
    CSV_HEADER,
    IMPLS,
    SWEEP_HEADER,
    ValidationFailure,
    WorkloadSpec,
    bench_queries,
    bench_updates,
    diameter_sweep,
    generate,
    memory_row,
    parse_family,
    read_edge_list,
    spanning_forest,
    write_edge_list,
)

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_VALIDATION = 3


def _seeds(text: str) -> list[int]:
    """``"3"``, ``"1,2,5"`` or an inclusive range ``"1..5"``."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return list(range(int(lo), int(hi) + 1))
        return [int(s) for s in text.split(",") if s]
    except ValueError:
        raise BadSpec(f"bad seed list {text!r}") from None


def _floats(text: str) -> list[float]:
    try:
        return [float(a) for a in text.split(",") if a]
    except ValueError:
        raise BadSpec(f"bad alpha list {text!r}") from None


def _spec(args: argparse.Namespace, **over) -> WorkloadSpec:
    fam, params = parse_family(args.family)
    fields = dict(
        family=fam,
        n=args.n,
        seed=getattr(args, "seed", 0),
        impl=getattr(args, "impl", "ufo"),
        k=getattr(args, "k", 1),
        threads=getattr(args, "threads", 1),
        validate=getattr(args, "validate", False),
        reps=getattr(args, "reps", 1),
        queries=getattr(args, "queries", 1000),
        permute=not getattr(args, "no_permute", False),
    )
    fields.update(params)
    fields.update(over)
    spec = WorkloadSpec(**fields)
    spec.check()
    return spec


def _writer(out=None):
    return csv.writer(out or sys.stdout, lineterminator="\n")


def _report_medians(rows: Sequence[tuple]) -> None:
    phases: dict[str, list[float]] = {}
    for r in rows:
        phases.setdefault(r[6], []).append(r[7])
    for phase, xs in phases.items():
        print(f"{phase}: median {statistics.median(xs):.6f}s over {len(xs)} run(s)", file=sys.stderr)


def cmd_gen(args) -> int:
    edges = generate(_spec(args))
    if args.out and args.out != "-":
        write_edge_list(args.out, edges)
    else:
        write_edge_list(sys.stdout, edges)
    return EXIT_OK


def cmd_bench_updates(args) -> int:
    rows = bench_updates(_spec(args))
    w = _writer()
    w.writerow(CSV_HEADER)
    w.writerows(rows)
    _report_medians(rows)
    return EXIT_OK


def cmd_bench_queries(args) -> int:
    rows = bench_queries(_spec(args))
    w = _writer()
    w.writerow(CSV_HEADER)
    w.writerows(rows)
    _report_medians(rows)
    return EXIT_OK


def cmd_diameter_sweep(args) -> int:
    rows = diameter_sweep(_floats(args.alphas), args.n, _seeds(args.seeds), impl=args.impl)
    w = _writer()
    w.writerow(SWEEP_HEADER)
    w.writerows(rows)
    return EXIT_OK


def cmd_ingest(args) -> int:
    n, edges = read_edge_list(args.graph)
    forest = spanning_forest(n, edges, args.forest, args.seed)
    print(f"{len(forest)} forest edges over {n} vertices", file=sys.stderr)
    if args.out and args.out != "-":
        write_edge_list(args.out, forest)
    else:
        write_edge_list(sys.stdout, forest)
    return EXIT_OK


def cmd_mem(args) -> int:
    w = _writer()
    w.writerow(CSV_HEADER)
    w.writerow(memory_row(_spec(args)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ufotree", description="Dynamic forest benchmarks.")
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp, impl=True):
        sp.add_argument("--family", required=True, help="e.g. path, star, kary(4), zipf(1.5)")
        sp.add_argument("--n", type=int, required=True)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--no-permute", action="store_true", help="keep generator vertex ids")
        if impl:
            sp.add_argument("--impl", choices=IMPLS, default="ufo")

    g = sub.add_parser("gen", help="write a generated tree as an edge list")
    common(g, impl=False)
    g.add_argument("--out", default="-")
    g.set_defaults(func=cmd_gen)

    for name, func in (("bench-updates", cmd_bench_updates), ("bench-queries", cmd_bench_queries)):
        b = sub.add_parser(name)
        common(b)
        b.add_argument("--k", type=int, default=1, help="batch size")
        b.add_argument("--threads", type=int, default=1)
        b.add_argument("--reps", type=int, default=3)
        b.add_argument("--queries", type=int, default=1000)
        b.add_argument("--validate", action="store_true", help="cross-check against the oracle")
        b.set_defaults(func=func)

    d = sub.add_parser("diameter-sweep")
    d.add_argument("--alphas", default="0.5,1.0,1.5,2.0")
    d.add_argument("--n", type=int, required=True)
    d.add_argument("--seeds", default="0..4", help="list '1,2,3' or range '1..5'")
    d.add_argument("--impl", choices=IMPLS, default="ufo")
    d.set_defaults(func=cmd_diameter_sweep)

    i = sub.add_parser("ingest", help="spanning forest of an edge-list graph")
    i.add_argument("--graph", required=True)
    i.add_argument("--forest", choices=("bfs", "ris"), default="bfs")
    i.add_argument("--seed", type=int, default=0)
    i.add_argument("--out", default="-")
    i.set_defaults(func=cmd_ingest)

    m = sub.add_parser("mem", help="structure bytes after a full build")
    common(m)
    m.set_defaults(func=cmd_mem)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (BadSpec, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except ValidationFailure as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
