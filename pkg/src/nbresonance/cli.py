"""Command-line front end: ``nbres analyze | verify | generate | zeta``."""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import report as rp
from .errors import CoverError, FormatError, GraphError, NumericalError, ResonanceError
from .graph_core import format_edge_list, generate_random_regular, parse_named_spec, read_edge_list
from .pairing_formula import DEFAULT_COMBOS, DEFAULT_NMAX, DEFAULT_TOL
from .spectra import DEFAULT_TOL_CLUSTER

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_FORMAT = 4
EXIT_GRAPH = 5
EXIT_NUMERIC = 6
EXIT_COVER = 7
EXIT_OTHER = 8


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _triple(text: str) -> tuple[int, int, int]:
    try:
        n, d, s = (int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected n,degree,seed") from None
    return n, d, s


def _add_graph_input(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("input", nargs="?", help="edge-list file")
    src.add_argument("--named", help="named graph, e.g. complete:4, petersen, hypercube3")
    src.add_argument("--random", type=_triple, metavar="N,DEG,SEED", help="seeded random regular graph")


def _add_check_flags(p):
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--nmax", type=int, default=DEFAULT_NMAX)
    p.add_argument("--depth", type=int, default=0, help="tree-cover depth (0 skips cover checks)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--combos", type=int, default=DEFAULT_COMBOS, help="eigenspace combinations per resonance")
    p.add_argument("--tol-cluster", type=float, default=DEFAULT_TOL_CLUSTER)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nbres", description="Resonances of non-backtracking transfer operators on regular graphs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="full pipeline on one graph")
    _add_graph_input(a)
    _add_check_flags(a)
    a.add_argument("--format", choices=("json", "csv"), default="json")
    a.add_argument("--out", help="write the report here instead of stdout")

    v = sub.add_parser("verify", help="run all checks over a graph suite")
    _add_check_flags(v)
    v.add_argument("--seed-count", type=int, default=20)
    v.add_argument("--n", type=int, default=None, help="vertex count of random graphs (default cycles 10..20)")
    v.add_argument("--degree", type=int, default=3)
    v.add_argument("--no-named", action="store_true", help="skip the named graphs")
    v.add_argument("--jobs", type=int, default=min(8, os.cpu_count() or 1))

    g = sub.add_parser("generate", help="write a seeded random regular graph")
    g.add_argument("n", type=int)
    g.add_argument("degree", type=int)
    g.add_argument("seed", type=int)
    g.add_argument("--out")

    z = sub.add_parser("zeta", help="Ihara-Bass determinant residuals")
    _add_graph_input(z)
    z.add_argument("--samples", type=int, default=20)
    z.add_argument("--seed", type=int, default=0)
    z.add_argument("--out")
    return parser


def _load(args):
    if args.named:
        return parse_named_spec(args.named)
    if args.random:
        return generate_random_regular(*args.random)
    return read_edge_list(args.input)


def _config(args) -> rp.AnalysisConfig:
    if args.nmax < 1 or args.depth < 0 or args.combos < 1 or args.tol <= 0:
        raise _UsageError("need --nmax >= 1, --depth >= 0, --combos >= 1, --tol > 0")
    return rp.AnalysisConfig(
        tol=args.tol, n_max=args.nmax, depth=args.depth, seed=args.seed,
        combos=args.combos, tol_cluster=args.tol_cluster,
    )


class _UsageError(Exception):
    pass


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_analyze(args) -> int:
    cfg = _config(args)
    report = rp.analyze_graph(_load(args), cfg)
    if args.format == "json":
        text = rp.to_json(report) + "\n"
    else:
        text = rp.resonance_csv(report) + "\n" + rp.theorem_csv(report)
    _emit(text, args.out)
    return EXIT_OK if report["pass"] else EXIT_CHECK_FAILED


def cmd_verify(args) -> int:
    cfg = _config(args)
    specs = [] if args.no_named else list(rp.NAMED_SUITE)
    specs += rp.default_random_specs(args.seed_count, args.n, args.degree)

    def run(spec):
        return rp.analyze_graph(rp.graph_from_spec(spec), cfg)

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        reports = list(pool.map(run, specs))

    ok = True
    print(f"{'graph':<22} {'check':<34} {'max_residual':>24} {'threshold':>10}  status")
    for rep in reports:
        for src, name, value, thr, passed in rp.verify_rows(rep):
            ok &= passed
            print(f"{src:<22} {name:<34} {value:>24.17g} {thr:>10.3g}  {'PASS' if passed else 'FAIL'}")
    print(f"{len(reports)} graphs: {'ALL PASS' if ok else 'FAILURES'}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_generate(args) -> int:
    g = generate_random_regular(args.n, args.degree, args.seed)
    _emit(format_edge_list(g), args.out)
    return EXIT_OK


def cmd_zeta(args) -> int:
    if args.samples < 0:
        raise _UsageError("--samples must be >= 0")
    g = _load(args)
    rows = rp.zeta_table(g, args.samples, args.seed)
    _emit(rp.to_json({"graph": g.summary(), "rows": rows}) + "\n", args.out)
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "verify": cmd_verify, "generate": cmd_generate, "zeta": cmd_zeta}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"nbres: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"nbres: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except FormatError as exc:
        print(f"nbres: format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except GraphError as exc:
        print(f"nbres: graph error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_GRAPH
    except NumericalError as exc:
        print(f"nbres: numerical error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except CoverError as exc:
        print(f"nbres: cover error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_COVER
    except ResonanceError as exc:
        print(f"nbres: error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
