"""Command-line front end: init, run, status, export, purge.

Exit codes are stable: 0 success, 2 configuration/DSN problem, 3 storage
failure, 4 refused destructive operation.  The database DSN comes from
--db or the SSTUDY_DB environment variable.
"""

from __future__ import annotations

import argparse
import os
import sys
import threading

from .analysis import aggregate, ecdf, export, rejection_rows
from .runner import RunOptions, default_worker_id, run_study
from .storage import StorageError, connect
from .studies import StudyDefinition, get_study, study_names

__all__ = ["main", "entry"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STORAGE = 3
EXIT_REFUSED = 4

ENV_DSN = "SSTUDY_DB"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simstudy",
        description="Run distributed simulation studies against a SQL store.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--db", default=None,
                       help=f"database DSN (file path or postgres URL); default ${ENV_DSN}")
        p.add_argument("--study", required=True, choices=study_names())
        p.add_argument("--full", action="store_true",
                       help="include the large-sample grid rows where a study has them")

    p_init = sub.add_parser("init", help="create the study's tables")
    common(p_init)

    p_run = sub.add_parser("run", help="run replications until the grid is saturated")
    common(p_run)
    p_run.add_argument("--max-count", type=int, default=None,
                       help="replications per configuration (default: study default)")
    p_run.add_argument("--workers", type=int, default=1, help="worker threads in this process")
    p_run.add_argument("--seed", type=int, default=0, help="master seed for this run")
    p_run.add_argument("--mode", choices=["check", "reserve"], default="check")
    p_run.add_argument("--worker-id", default=None,
                       help="base worker identity (default: host-pid, unique per process)")
    p_run.add_argument("--lease", type=float, default=600.0,
                       help="reservation lease in seconds (reserve mode)")

    p_status = sub.add_parser("status", help="show per-configuration progress")
    common(p_status)
    p_status.add_argument("--max-count", type=int, default=None)

    p_export = sub.add_parser("export", help="write aggregated result tables")
    common(p_export)
    p_export.add_argument("--out", default=None,
                          help="output path (default: aggregate table to stdout)")
    p_export.add_argument("--format", choices=["csv", "json"], default="csv")

    p_purge = sub.add_parser("purge", help="delete all stored rows for a study")
    common(p_purge)
    p_purge.add_argument("--yes", action="store_true", help="confirm the deletion")

    return parser


def _resolve_dsn(args) -> str:
    dsn = args.db or os.environ.get(ENV_DSN, "")
    if not dsn:
        raise ValueError(f"no database given: pass --db or set ${ENV_DSN}")
    return dsn


def _load_study(args) -> StudyDefinition:
    options = {}
    if args.study == "regression" and getattr(args, "full", False):
        options["include_large_n"] = True
    return get_study(args.study, **options)


def cmd_init(args) -> int:
    try:
        dsn = _resolve_dsn(args)
        study = _load_study(args)
        with connect(dsn) as store:
            store.init_table(study.schema)
    except (ValueError, StorageError) as exc:
        print(f"init failed: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"initialized tables for study {study.name!r}")
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        dsn = _resolve_dsn(args)
        study = _load_study(args)
    except (ValueError, KeyError) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    max_count = args.max_count if args.max_count is not None else study.default_max_count
    workers = max(1, args.workers)
    base_id = args.worker_id or default_worker_id()

    try:
        with connect(dsn) as store:
            store.init_table(study.schema)
    except StorageError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    stop = threading.Event()
    errors: list[BaseException] = []
    reports = []

    def work(index: int) -> None:
        worker_id = base_id if workers == 1 else f"{base_id}-t{index}"
        opts = RunOptions(
            max_count=max_count, mode=args.mode, worker_id=worker_id,
            master_seed=args.seed, lease_seconds=args.lease,
        )
        try:
            with connect(dsn) as store:
                reports.append(run_study(study.space, study.schema, study.fn, store, opts,
                                         stop_event=stop))
        except BaseException as exc:  # noqa: BLE001 - surfaced in the main thread
            errors.append(exc)

    threads = [threading.Thread(target=work, args=(i,), daemon=True) for i in range(workers)]
    for t in threads:
        t.start()
    try:
        while any(t.is_alive() for t in threads):
            for t in threads:
                t.join(timeout=0.2)
    except KeyboardInterrupt:
        print("stopping after in-flight replications...", file=sys.stderr)
        stop.set()
        for t in threads:
            t.join()

    if errors:
        for exc in errors:
            print(f"worker error: {exc}", file=sys.stderr)
        if any(isinstance(e, StorageError) for e in errors):
            return EXIT_STORAGE
        return 1
    total = sum(r.replications_done for r in reports)
    print(f"{total} replications stored")
    return EXIT_OK


def cmd_status(args) -> int:
    try:
        dsn = _resolve_dsn(args)
        study = _load_study(args)
        max_count = args.max_count if args.max_count is not None else study.default_max_count
        with connect(dsn) as store:
            store.init_table(study.schema)
            counts = store.count_all(study.schema, study.space.configurations())
    except (ValueError, StorageError) as exc:
        print(f"status failed: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    done = 0
    for config, count in counts.items():
        label = " ".join(f"{k}={v}" for k, v in config.assignments)
        flag = "  done" if count >= max_count else ""
        print(f"{label}  {count}/{max_count}{flag}")
        if count >= max_count:
            done += 1
    print(f"{done}/{len(counts)} configurations complete")
    return EXIT_OK


def _export_header(study: StudyDefinition) -> list[str]:
    header = [name for name, _ in study.space.axes]
    header.append("n")
    for f in study.schema.outcome_fields:
        if f.kind in ("float", "integer"):
            header += [f"{f.name}_mean", f"{f.name}_se", f"{f.name}_fmt"]
    return header


def cmd_export(args) -> int:
    try:
        dsn = _resolve_dsn(args)
        study = _load_study(args)
        with connect(dsn) as store:
            store.init_table(study.schema)
            records = store.read_results(study.schema)
    except (ValueError, StorageError) as exc:
        print(f"export failed: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    axes = [name for name, _ in study.space.axes]
    summaries = aggregate(records, axes)
    try:
        if args.out is None:
            export(summaries, args.format, sys.stdout,
                   include_formatted=True, header=_export_header(study))
            return EXIT_OK
        export(summaries, args.format, args.out,
               include_formatted=True, header=_export_header(study))
        written = [args.out]
        if study.name == "hypothesis" and records:
            written += _export_hypothesis_extras(args, study, records)
        print(f"wrote {', '.join(written)}")
    except OSError as exc:
        print(f"export failed: {exc}", file=sys.stderr)
        return EXIT_STORAGE
    return EXIT_OK


def _export_hypothesis_extras(args, study, records) -> list[str]:
    """Rejection-rate tables per hypothesis and one ECDF file per configuration."""
    stem, dot, suffix = args.out.rpartition(".")
    if not dot:
        stem, suffix = args.out, args.format
    written = []
    for hypothesis in study.space.values("hypothesis"):
        subset = [r for r in records if r.config["hypothesis"] == hypothesis]
        if not subset:
            continue
        rows = rejection_rows(subset, ["method", "n_instances"])
        path = f"{stem}_rejection_{hypothesis}.{suffix}"
        export(rows, args.format, path)
        written.append(path)
    for config in study.space.configurations():
        subset = [r for r in records if r.config == config]
        if not subset:
            continue
        curve = ecdf([r.outcomes["p_value"] for r in subset])
        tag = "_".join(str(v) for _, v in config.assignments)
        path = f"{stem}_ecdf_{tag}.{suffix}"
        export(curve, args.format, path)
        written.append(path)
    return written


def cmd_purge(args) -> int:
    try:
        dsn = _resolve_dsn(args)
        study = _load_study(args)
    except (ValueError, KeyError) as exc:
        print(f"purge failed: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not args.yes:
        print("refusing to delete rows without --yes", file=sys.stderr)
        return EXIT_REFUSED
    try:
        with connect(dsn) as store:
            store.purge_table(study.schema)
    except StorageError as exc:
        print(f"purge failed: {exc}", file=sys.stderr)
        return EXIT_STORAGE
    print(f"purged study {study.name!r}")
    return EXIT_OK


_COMMANDS = {
    "init": cmd_init,
    "run": cmd_run,
    "status": cmd_status,
    "export": cmd_export,
    "purge": cmd_purge,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    return _COMMANDS[args.command](args)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
