"""Command-line front end.

Exit status: 0 on success, 1 on usage or parse errors, 2 when a size bound
(``--max-cycles``, ``--eq-ceiling``) refuses the work.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from xorcraft import __version__
from xorcraft.classify import classify_instance, random_deducibility_test
from xorcraft.core import CnfXorFormula
from xorcraft.engines import ENGINES, UsageError
from xorcraft.formats import DEFAULT_EXPANSION_CAP, DEFAULT_MAX_ARITY, ParseError, emit, extract_xors, parse
from xorcraft.graph import build_graph, to_dot
from xorcraft.translate import (
    DEFAULT_EQ_CEILING,
    DEFAULT_MAX_CYCLES,
    CapacityError,
    clausify_tree_part,
    cycles_translation,
    eq_star_translation,
    eq_translation,
    generate_diamond,
    is_3xor_normal_form,
    to_3xor_normal_form,
)

log = logging.getLogger("xorcraft")

INSTANCE_SUFFIXES = {".cnf", ".xcnf", ".dimacs"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="xorcraft", description=__doc__.splitlines()[0] if __doc__ else None)
    p.add_argument("--version", action="version", version=f"xorcraft {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("classify", help="structural classes and deducibility tests per file")
    c.add_argument("inputs", nargs="+", help="files or directories")
    c.add_argument("--trials", type=_positive, default=100)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--format", choices=("json", "text"), default="json")
    c.add_argument("--emit-dot", metavar="PATH", help="constraint graph in DOT (a directory for several inputs)")
    c.add_argument("-o", "--output")

    r = sub.add_parser("report", help="classification table plus figures")
    r.add_argument("inputs", nargs="+", help="files or directories")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--trials", type=_positive, default=100)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--delimiter", choices=("comma", "tab"), default="comma")
    r.add_argument("--diamond-sizes", type=_positive, metavar="N",
                   help="also plot translation sizes on D(1..N)")

    n = sub.add_parser("normalize", help="3-xor normal form")
    n.add_argument("input", nargs="?", default="-")
    n.add_argument("-o", "--output")
    n.add_argument("--map", help="JSON sidecar for eliminated and cut variables")

    t = sub.add_parser("translate", help="tree clausification or EC-simulation translations")
    t.add_argument("input", nargs="?", default="-")
    t.add_argument("--mode", choices=("cnf-tree", "cycles", "eq", "eqstar"), required=True)
    t.add_argument("--max-cycles", type=_positive, default=DEFAULT_MAX_CYCLES)
    t.add_argument("--eq-ceiling", type=_positive, default=DEFAULT_EQ_CEILING)
    t.add_argument("--expansion-cap", type=_positive, default=DEFAULT_EXPANSION_CAP)
    t.add_argument("-o", "--output")
    t.add_argument("--map", help="JSON sidecar for auxiliary variables")

    x = sub.add_parser("extract", help="recover xor-clauses from CNF")
    x.add_argument("input", nargs="?", default="-")
    x.add_argument("--max-arity", type=int, default=DEFAULT_MAX_ARITY)
    x.add_argument("-o", "--output")

    e = sub.add_parser("test", help="randomized deducibility test against Gaussian elimination")
    e.add_argument("input", nargs="?", default="-")
    e.add_argument("--engine", choices=("up", "subst", "ec"), default="up")
    e.add_argument("--trials", type=_positive, default=100)
    e.add_argument("--seed", type=int, default=0)

    d = sub.add_parser("gen-diamond", help="emit the diamond family D(n)")
    d.add_argument("--n", type=_positive, required=True)
    d.add_argument("-o", "--output")

    q = sub.add_parser("propagate", help="implied literals under assumptions")
    q.add_argument("input", nargs="?", default="-")
    q.add_argument("--engine", choices=tuple(ENGINES), default="up")
    q.add_argument("--assume", default="", help='literals, e.g. "1 -4"')
    return p


def _read(path: str) -> CnfXorFormula:
    if path == "-":
        return parse(sys.stdin.read())
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    return parse(text)


def _write(text: str, output: Optional[str]) -> None:
    if output is None or output == "-":
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


def _write_json(data, path: str) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _expand(inputs: Sequence[str]) -> list[str]:
    files: list[str] = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            files.extend(str(q) for q in sorted(p.iterdir()) if q.suffix in INSTANCE_SUFFIXES)
        else:
            files.append(item)
    return files


def _workers() -> int:
    env = os.environ.get("XORCRAFT_THREADS")
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def classify_file(path: str, trials: int, seed: int) -> dict:
    formula = _read(path)
    info = classify_instance(formula)
    up = random_deducibility_test(formula, "up", trials, seed)
    subst = random_deducibility_test(formula, "subst", trials, seed)
    row = {
        "file": Path(path).name if path != "-" else "-",
        "xors": info["xorCount"],
        "verdictUP": up.verdict,
        "verdictSubst": subst.verdict,
        "failures": [dict(f, engine="up") for f in up.failures]
        + [dict(f, engine="subst") for f in subst.failures],
    }
    row.update({k: v for k, v in info.items() if k != "xorCount"})
    return row


def _classify_many(files: list[str], trials: int, seed: int) -> list[dict]:
    workers = _workers()
    if len(files) <= 1 or workers == 1:
        return [classify_file(f, trials, seed) for f in files]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(classify_file, files, [trials] * len(files), [seed] * len(files)))


def _envelope(command: str, config: dict, **payload) -> dict:
    return {"tool": "xorcraft", "version": __version__, "command": command, "config": config, **payload}


def cmd_classify(args) -> int:
    files = _expand(args.inputs)
    if not files:
        raise UsageError("no input files")
    rows = _classify_many(files, args.trials, args.seed)
    if args.emit_dot:
        if len(files) == 1:
            _write(to_dot(build_graph(_read(files[0]).xor_clauses)), args.emit_dot)
        else:
            out = Path(args.emit_dot)
            out.mkdir(parents=True, exist_ok=True)
            for f in files:
                (out / (Path(f).stem + ".dot")).write_text(to_dot(build_graph(_read(f).xor_clauses)))
    if args.format == "json":
        config = {"inputs": list(args.inputs), "trials": args.trials, "seed": args.seed,
                  "assumptionSizes": "uniform 1..|vars|"}
        text = json.dumps(_envelope("classify", config, reports=rows), indent=2, sort_keys=True) + "\n"
    else:
        text = "".join(
            f"{r['file']}\txors={r['xors']}\ttreeLike={r['treeLike']}\t"
            f"treePart={r['treePartFraction']:.3f}\tcyclePartitionable={r['cyclePartitionable']}\t"
            f"UP={r['verdictUP']}\tSubst={r['verdictSubst']}\n" for r in rows)
    _write(text, args.output)
    return 0


def cmd_report(args) -> int:
    from xorcraft.report import plot_translation_sizes, write_report

    files = _expand(args.inputs)
    if not files:
        raise UsageError("no input files")
    rows = _classify_many(files, args.trials, args.seed)
    out = Path(args.out)
    written = write_report(rows, out, "\t" if args.delimiter == "tab" else ",")
    if args.diamond_sizes:
        ns = list(range(1, args.diamond_sizes + 1))
        sizes: dict[str, list[int]] = {"cycles": [], "Eq*": []}
        for n in ns:
            xors = generate_diamond(n).xor_clauses
            sizes["cycles"].append(len(cycles_translation(xors).added))
            sizes["Eq*"].append(len(eq_star_translation(xors).added))
        written.append(plot_translation_sizes(ns, sizes, out / "diamond_translation_sizes.png"))
    for path in written:
        print(path)
    return 0


def cmd_normalize(args) -> int:
    nf = to_3xor_normal_form(_read(args.input))
    if nf.conflict:
        _write("c xor part is unsatisfiable\np cnf 1 2\n1 0\n-1 0\n", args.output)
    else:
        _write(emit(nf.formula, comments=("3-xor normal form",)), args.output)
    map_path = args.map or (args.output + ".map.json" if args.output and args.output != "-" else None)
    if map_path:
        _write_json(nf.to_json(), map_path)
    return 0


def cmd_translate(args) -> int:
    formula = _read(args.input)
    if args.mode == "cnf-tree":
        out = clausify_tree_part(formula, args.expansion_cap)
        _write(emit(out, comments=(f"tree-like part clausified: {len(formula.xor_clauses) - len(out.xor_clauses)} xor-clauses",)),
               args.output)
        return 0
    if not is_3xor_normal_form(formula.xor_clauses):
        nf = to_3xor_normal_form(formula)
        if nf.conflict:
            raise UsageError("xor part is unsatisfiable during 3-xor normalization")
        print("xorcraft: input is not in 3-xor normal form; normalized first", file=sys.stderr)
        formula = nf.formula
    xors = formula.xor_clauses
    if args.mode == "cycles":
        result = cycles_translation(xors, args.max_cycles)
    elif args.mode == "eq":
        result = eq_translation(xors, formula.next_fresh_var, args.eq_ceiling)
    else:
        result = eq_star_translation(xors, formula.next_fresh_var)
    out = result.apply(formula)
    _write(emit(out, comments=(f"{args.mode} translation: added {len(result.added)} xor-clauses, "
                               f"{len(result.aux_vars)} auxiliary variables",)), args.output)
    if args.map:
        _write_json(dict(result.to_json(), mode=args.mode), args.map)
    return 0


def cmd_extract(args) -> int:
    if args.max_arity < 2:
        raise UsageError("--max-arity must be at least 2")
    formula = _read(args.input)
    out = extract_xors(formula, args.max_arity)
    found = len(out.xor_clauses) - len(formula.xor_clauses)
    _write(emit(out, comments=(f"extracted {found} xor-clauses",)), args.output)
    return 0


def cmd_test(args) -> int:
    formula = _read(args.input)
    xors = formula.xor_clauses
    normalized = False
    if args.engine == "ec" and any(len(c) > 3 for c in xors):
        nf = to_3xor_normal_form(CnfXorFormula([], list(xors), formula.num_vars))
        if nf.conflict:
            raise UsageError("xor part is unsatisfiable during 3-xor normalization")
        xors, normalized = nf.formula.xor_clauses, True
    report = random_deducibility_test(xors, args.engine, args.trials, args.seed)
    config = {"input": args.input, "engine": args.engine, "trials": args.trials, "seed": args.seed,
              "normalized": normalized}
    print(json.dumps(_envelope("test", config, report=report.to_json()), indent=2, sort_keys=True))
    return 0


def cmd_gen_diamond(args) -> int:
    _write(emit(generate_diamond(args.n), comments=(f"diamond family D({args.n})",)), args.output)
    return 0


def cmd_propagate(args) -> int:
    formula = _read(args.input)
    try:
        assumptions = [int(tok) for tok in args.assume.split()]
    except ValueError:
        raise UsageError(f"--assume expects integers, got {args.assume!r}") from None
    if 0 in assumptions:
        raise UsageError("--assume: 0 is not a literal")
    closure = ENGINES[args.engine](formula.xor_clauses, assumptions)
    if closure.conflict:
        print("s CONFLICT")
        print("c premises " + " ".join(map(str, sorted(closure.conflict_deps, key=abs))))
    else:
        print("s OK")
        print("v " + " ".join(map(str, sorted(closure.literals(), key=abs))) + " 0")
    return 0


COMMANDS = {
    "classify": cmd_classify,
    "report": cmd_report,
    "normalize": cmd_normalize,
    "translate": cmd_translate,
    "extract": cmd_extract,
    "test": cmd_test,
    "gen-diamond": cmd_gen_diamond,
    "propagate": cmd_propagate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="xorcraft: %(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except CapacityError as exc:
        print(f"xorcraft: {exc}", file=sys.stderr)
        return 2
    except (ParseError, UsageError, ValueError) as exc:
        print(f"xorcraft: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
