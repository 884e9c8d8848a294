"""Command-line interface for the benchmark harness.

Subcommands: ``gen`` (write instance files), ``run`` (execute a config),
``aggregate`` (records -> summary table), ``reproduce`` (preset tables at
desk or full scale) and ``verify`` (recompute a sample of records).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields, replace
from pathlib import Path

from .harness import (
    SCALES,
    TABLES,
    TableRow,
    aggregate,
    emit_csv,
    parse_config,
    preset_config,
    read_records,
    run_experiment,
    verify_records,
    write_instances,
)


def _add_override_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, help="master seed override")
    parser.add_argument("--out", help="output path override")
    parser.add_argument(
        "--optimizer",
        action="append",
        dest="optimizers",
        metavar="NAME",
        help="optimizer to run (repeatable): altopt|nft|bh|ga|tabu",
    )
    parser.add_argument("--encoding", choices=("rf", "rfprime"))
    parser.add_argument("--mode", choices=("exact", "shots"))
    parser.add_argument("--shots", type=int, help="samples per measurement batch")
    parser.add_argument("--workers", type=int, help="parallel cell workers")


def _apply_overrides(cfg, args):
    updates = {}
    for key in ("seed", "out", "encoding", "mode", "shots", "workers"):
        value = getattr(args, key, None)
        if value is not None:
            updates[key] = value
    if getattr(args, "optimizers", None):
        updates["optimizers"] = tuple(args.optimizers)
    return replace(cfg, **updates) if updates else cfg


def _print_rows(rows: list[TableRow]) -> None:
    names = [f.name for f in fields(TableRow)]
    print(",".join(names))
    for row in rows:
        print(
            ",".join(
                "" if getattr(row, n) is None else str(getattr(row, n)) for n in names
            )
        )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plateauopt",
        description="Plateau-encoded diagonal-ansatz optimization benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="write the config's instances as flat files")
    p_gen.add_argument("--config", required=True)
    p_gen.add_argument("--out", required=True, help="output directory")
    p_gen.add_argument("--seed", type=int, help="master seed override")

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("--config", required=True)
    _add_override_flags(p_run)

    p_agg = sub.add_parser("aggregate", help="aggregate a records CSV into a table")
    p_agg.add_argument("--records", required=True)
    p_agg.add_argument("--out", help="table CSV path (default: stdout)")

    p_rep = sub.add_parser("reproduce", help="run a preset benchmark table")
    p_rep.add_argument("--table", required=True, choices=TABLES)
    p_rep.add_argument("--scale", default="desk", choices=SCALES)
    _add_override_flags(p_rep)
    p_rep.add_argument("--table-out", help="aggregated table CSV path")

    p_ver = sub.add_parser("verify", help="recompute a sample of records")
    p_ver.add_argument("--config", required=True)
    p_ver.add_argument("--records", help="records CSV (default: the config's out)")
    p_ver.add_argument("--fraction", type=float, default=0.01)

    args = parser.parse_args(argv)

    if args.command == "gen":
        cfg = parse_config(args.config)
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        paths = write_instances(cfg, args.out)
        print(f"wrote {len(paths)} instance files to {args.out}")
        return 0

    if args.command == "run":
        cfg = _apply_overrides(parse_config(args.config), args)
        records = run_experiment(cfg)
        where = cfg.out or "(not written; set out= in the config or pass --out)"
        print(f"{len(records)} records -> {where}")
        return 0

    if args.command == "aggregate":
        rows = aggregate(read_records(args.records))
        if args.out:
            emit_csv(rows, args.out, schema=TableRow)
            print(f"{len(rows)} table rows -> {args.out}")
        else:
            _print_rows(rows)
        return 0

    if args.command == "reproduce":
        cfg = _apply_overrides(preset_config(args.table, args.scale), args)
        if cfg.out is None:
            cfg = replace(cfg, out=f"{args.table}_{args.scale}_records.csv")
        records = run_experiment(cfg)
        rows = aggregate(records)
        table_out = args.table_out or f"{args.table}_{args.scale}_table.csv"
        emit_csv(rows, table_out, schema=TableRow)
        print(f"{len(records)} records -> {cfg.out}")
        print(f"{len(rows)} table rows -> {table_out}")
        _print_rows(rows)
        return 0

    if args.command == "verify":
        cfg = parse_config(args.config)
        records_path = args.records or cfg.out
        if not records_path or not Path(records_path).exists():
            print("verify: no records file found", file=sys.stderr)
            return 2
        records = read_records(records_path)
        checked, mismatches = verify_records(cfg, records, fraction=args.fraction)
        if mismatches:
            for stored, fresh in mismatches:
                print(
                    f"MISMATCH {stored.problem_id}/{stored.optimizer}: "
                    f"stored energy {stored.energy}, recomputed {fresh.energy}",
                    file=sys.stderr,
                )
            return 1
        print(f"verified {checked}/{len(records)} records: all reproducible")
        return 0

    return 2  # unreachable


if __name__ == "__main__":
    raise SystemExit(main())
