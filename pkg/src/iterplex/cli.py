"""Command-line entry point: ``iterplex <command> ...``.

Exit codes: 0 ok, 1 invalid input, 2 size/feasibility guard, 3 lumpability
failure, 4 all-ones state unreachable.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import Sequence

from . import chain, oracle, spectral
from .algebra import CayleyTable, builtin_table, load_cayley_table
from .errors import FeasibilityExceeded, IterplexError, InvalidInput, StateSpaceTooLarge

SUMMARY_GROUPS = ("cyclic:2", "cyclic:3", "cyclic:4", "klein")


def summary_closed_form(group: str, d: int) -> int:
    """Known transversal counts of the d-iterated groups of order <= 4."""
    F = Fraction
    even = d % 2 == 0
    if group == "cyclic:2":
        v = F(0) if even else F(2) ** (d - 1)
    elif group == "cyclic:3":
        sign = -1 if even else 1
        v = F(2, 3) * F(6) ** (d - 1) + sign * F(3) ** (d - 2)
    elif group == "cyclic:4":
        v = F(0) if even else F(3, 8) * F(24) ** (d - 1) + 5 * F(8) ** (d - 2)
    elif group == "klein":
        tail = -F(8) ** (d - 2) if even else 5 * F(8) ** (d - 2)
        v = F(3, 8) * F(24) ** (d - 1) + tail
    else:
        raise KeyError(group)
    assert v.denominator == 1
    return int(v)


def load_table(source: str) -> CayleyTable:
    if source.startswith("builtin:"):
        return builtin_table(source)
    return load_cayley_table(source)


def _frac(x: Fraction | None) -> str | None:
    if x is None:
        return None
    return f"{x.numerator}/{x.denominator}"


def _emit(obj, fmt: str, out, plain: str | None = None, table_rows: list[dict] | None = None):
    if fmt == "json":
        out.write(json.dumps(obj, indent=2) + "\n")
    elif fmt == "csv":
        rows = table_rows if table_rows is not None else [obj]
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()) if rows else [], lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: ("" if v is None else v) for k, v in r.items()})
        out.write(buf.getvalue())
    else:
        out.write((plain if plain is not None else json.dumps(obj)) + "\n")


# ---------------------------------------------------------------- commands


def cmd_validate(args, out) -> int:
    try:
        t = load_cayley_table(args.path)
    except InvalidInput as exc:
        out.write(f"invalid: {exc}\n")
        return 1
    except OSError as exc:
        out.write(f"invalid: {exc}\n")
        return 1
    assoc = "associative" if t.is_associative() else "non-associative"
    out.write(f"valid quasigroup, order {t.order} ({assoc}, fingerprint {t.fingerprint()})\n")
    return 0


def _limit(args) -> int | None:
    return None if args.no_guard else args.max_work


def cmd_oracle(args, out) -> int:
    t = load_table(args.table)
    limit = _limit(args)
    base = {"table": t.fingerprint(), "order": t.order}
    if args.what == "transversals":
        count = oracle.count_transversals(t, args.d, limit=limit)
        obj = {**base, "d": args.d, "transversals": str(count)}
        _emit(obj, args.format, out, plain=str(count))
        return 0
    dim = args.dim
    if args.what == "multiplexes":
        if args.stream:
            n = 0
            for K in oracle.iter_multiplexes(t, dim, args.k, args.mode, limit):
                out.write(json.dumps(K.to_json()) + "\n")
                n += 1
            sys.stderr.write(f"{n} {args.mode}\n")
            return 0
        count = oracle.enumerate_multiplexes(t, dim, args.k, args.mode, limit)
        obj = {**base, "dim": dim, "k": args.k, "mode": args.mode, "count": str(count)}
        _emit(obj, args.format, out, plain=str(count))
        return 0
    if args.what == "partial":
        if args.l is None:
            raise InvalidInput("partial needs --l")
        if args.stream:
            n = 0
            for K in oracle.iter_partial_multiplexes(t, dim, args.k, args.l, args.mode, limit):
                out.write(json.dumps(K.to_json()) + "\n")
                n += 1
            sys.stderr.write(f"{n} partial {args.mode}\n")
            return 0
        count = oracle.count_partial_multiplexes(t, dim, args.k, args.l, args.mode, limit)
        obj = {**base, "dim": dim, "k": args.k, "l": args.l, "mode": args.mode, "count": str(count)}
        _emit(obj, args.format, out, plain=str(count))
        return 0
    if args.what == "classify":
        tally = oracle.classify_all(t, dim, args.k, limit)
        obj = {**base, "dim": dim, "k": args.k, **{key: str(v) for key, v in tally.items()}}
        plain = " ".join(f"{key}={v}" for key, v in tally.items())
        _emit(obj, args.format, out, plain=plain)
        return 0
    raise InvalidInput(args.what)


def _matrix(args, t: CayleyTable) -> chain.TransitionMatrix:
    cache = chain.resolve_cache_dir(getattr(args, "cache_dir", None))
    return chain.cached_transition(t, args.k, args.l, cache)


def cmd_chain(args, out) -> int:
    t = load_table(args.table)
    m = _matrix(args, t)
    if args.what == "matrix":
        obj = m.to_json()
        plain = "\n".join(" ".join(map(str, r)) for r in m.dense())
        _emit(obj, args.format, out, plain=plain)
        return 0
    if args.what == "count":
        dc = chain.derived_counts(t, args.k, args.d, args.l, matrix=m)
        obj = {
            "table": t.fingerprint(),
            "k": args.k,
            "l": m.l,
            "d": args.d,
            "dimension": dc.dimension,
            "table_count": str(dc.table_count),
            "transversals" if m.l == t.order else "partial_transversals":
                None if dc.multiplex_count is None else str(dc.multiplex_count),
        }
        plain = str(dc.multiplex_count if dc.multiplex_count is not None else dc.table_count)
        _emit(obj, args.format, out, plain=plain)
        return 0
    if args.what == "sequence":
        const, rows = spectral.sequence_report(t, args.k, args.d_max, args.l, matrix=m)
        recs = [
            {
                "d": r.d,
                "table_count": str(r.table_count),
                "count": None if r.count is None else str(r.count),
                "x_E": _frac(r.x_e),
                "deviation": _frac(r.deviation),
            }
            for r in rows
        ]
        obj = {"table": t.fingerprint(), "k": args.k, "l": m.l, "limit_x_E": _frac(const.x_limit), "rows": recs}
        plain = "\n".join(f"{r['d']}\t{r['count'] or r['table_count']}" for r in recs)
        _emit(obj, args.format, out, plain=plain, table_rows=recs)
        return 0
    if args.what == "verify-lumping":
        if not args.classes:
            raise InvalidInput("verify-lumping needs --classes")
        blocks, labels = chain.load_partition(args.classes)
        lp = chain.verify_lumping(m, blocks, labels)
        obj = {
            "table": t.fingerprint(),
            "k": args.k,
            "labels": lp.labels,
            "block_sizes": [str(s) for s in lp.block_sizes],
            "block_matrix": [[_frac(x) if x.denominator != 1 else str(x.numerator) for x in r] for r in lp.block_matrix],
            "quotient": [[str(x) for x in r] for r in lp.quotient],
        }
        plain = "\n".join(" ".join(str(x) for x in r) for r in lp.block_matrix)
        _emit(obj, args.format, out, plain=plain)
        return 0
    raise InvalidInput(args.what)


def constant_report(t: CayleyTable, k: int, l: int | None, c: spectral.LimitConstant) -> dict:
    obj = {"table": t.fingerprint(), "k": k}
    if l is not None:
        obj["l"] = l
    obj.update(
        c=_frac(c.value),
        decimal=c.decimal,
        subsequence=c.subsequence,
        scc_size=c.scc_size,
        period=c.period,
    )
    if k >= 2:
        obj["c_lambda_convention"] = _frac(c.lambda_convention)
        obj["decimal_lambda_convention"] = spectral.to_decimal(c.lambda_convention)
    return obj


def cmd_constant(args, out) -> int:
    t = load_table(args.table)
    m = _matrix(args, t)
    c = spectral.limit_constant(t, args.k, args.l, matrix=m)
    obj = constant_report(t, args.k, args.l, c)
    _emit(obj, args.format, out, plain=f"{obj['c']} ({c.subsequence})")
    return 0


def summary_table(d_max: int = 12) -> list[dict]:
    cells = []
    for g in SUMMARY_GROUPS:
        counts = chain.transversal_counts(builtin_table(g), d_max)
        for d, got in enumerate(counts, 1):
            want = summary_closed_form(g, d)
            cells.append(
                {"group": g, "d": d, "chain": str(got), "closed_form": str(want),
                 "verdict": "EQUAL" if got == want else "DIFFER"}
            )
    return cells


def cmd_paper_table(args, out) -> int:
    cells = summary_table(args.d_max)
    lines = []
    for g in SUMMARY_GROUPS:
        for c in cells:
            if c["group"] == g:
                lines.append(f"{g:9s} d={c['d']:<3d} {c['chain']:>20s} {c['verdict']}")
    _emit({"cells": cells}, args.format, out, plain="\n".join(lines), table_rows=cells)
    return 0 if all(c["verdict"] == "EQUAL" for c in cells) else 1


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="iterplex", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=("json", "csv", "plain"), default="json")

    src = argparse.ArgumentParser(add_help=False)
    src.add_argument("--table", required=True,
                     help="table file, or builtin:cyclic:<n> | builtin:klein | builtin:product:<a>x<b>")
    src.add_argument("--k", type=int, default=1)
    src.add_argument("--l", type=int, default=None, help="partial length")

    cache = argparse.ArgumentParser(add_help=False)
    cache.add_argument("--cache-dir", default=None, help="matrix cache (falls back to $QG_CACHE_DIR)")

    v = sub.add_parser("validate", help="check a Cayley table file")
    v.add_argument("path")

    o = sub.add_parser("oracle", help="exhaustive counts", parents=[src, fmt])
    o.add_argument("what", choices=("transversals", "multiplexes", "partial", "classify"))
    o.add_argument("--d", type=int, help="hypercube dimension (transversals)")
    o.add_argument("--dim", type=int, help="MDS code dimension D")
    o.add_argument("--mode", choices=("sets", "multisets"), default="multisets")
    o.add_argument("--stream", action="store_true", help="print one multiplex per line")
    o.add_argument("--max-work", type=int, default=oracle.DEFAULT_WORK_LIMIT)
    o.add_argument("--no-guard", action="store_true", help="disable the feasibility guard")

    c = sub.add_parser("chain", help="Markov-recurrence counts", parents=[src, fmt, cache])
    c.add_argument("what", choices=("matrix", "count", "sequence", "verify-lumping"))
    c.add_argument("--d", type=int, default=2)
    c.add_argument("--d-max", type=int, default=12)
    c.add_argument("--classes", help="partition fixture (JSON)")

    sub.add_parser("constant", help="limit constant c(G,k[,l])", parents=[src, fmt, cache])

    t = sub.add_parser("paper-table", help="reproduce the order <= 4 summary table")
    t.add_argument("--d-max", type=int, default=12)
    # own option: parent-parser actions are shared, so set_defaults would leak
    t.add_argument("--format", choices=("json", "csv", "plain"), default="plain")
    return p


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    handlers = {
        "validate": cmd_validate,
        "oracle": cmd_oracle,
        "chain": cmd_chain,
        "constant": cmd_constant,
        "paper-table": cmd_paper_table,
    }
    try:
        if args.command == "oracle":
            if args.what == "transversals" and args.d is None:
                raise InvalidInput("transversals needs --d")
            if args.what != "transversals" and args.dim is None:
                raise InvalidInput(f"{args.what} needs --dim")
        return handlers[args.command](args, out)
    except (FeasibilityExceeded, StateSpaceTooLarge) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.exit_code
    except IterplexError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return getattr(exc, "exit_code", 1)
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
