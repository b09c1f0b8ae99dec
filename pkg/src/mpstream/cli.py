"""Command line: ``mpstream run CONFIG [--out DIR] [--seed N] [--format csv|json] [--check]``.

Exit status 0 on success, 1 when the configuration is invalid, 2 when any
sweep point fails at run time.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from .config import ConfigError, LoadedConfig, load_config
from .sim import SweepRow, grid_points, sweep

log = logging.getLogger("mpstream")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2

COLUMNS = [
    "point",
    "seed",
    "status",
    "num_paths",
    "rates",
    "erasures",
    "prop_delays",
    "intervals",
    "coded_path",
    "coded_interval",
    "lambda",
    "analytic_slots",
    "analytic_seconds",
    "sim_mean_delay_s",
    "sim_sigma_delay_s",
    "band_low_s",
    "band_high_s",
    "sim_mean_excess_s",
    "sim_sigma_excess_s",
    "sim_mean_excess_slots",
    "rel_delta",
    "throughput",
    "completion_s",
    "renewals",
    "erased",
    "error",
]


@dataclass
class RunManifest:
    config_path: Path
    out_dir: Path
    seed: int | None = None
    fmt: str = "csv"
    workers: int | None = None


def _num(x: float | int | None) -> str:
    if x is None:
        return ""
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def _join(values) -> str:
    return ";".join(_num(v) if v is not None else "-" for v in values)


def row_record(point: int, row: SweepRow) -> dict[str, str]:
    cfg = row.config
    res = row.result
    if row.error is None:
        status = "ok"
    elif row.error.startswith("inadmissible"):
        status = "skipped"
    else:
        status = "failed"
    coded = cfg.policy.coded_path
    rec: dict[str, Any] = {
        "point": point,
        "seed": cfg.seed,
        "status": status,
        "num_paths": len(cfg.paths),
        "rates": _join(p.rate for p in cfg.paths),
        "erasures": _join(p.erasure for p in cfg.paths),
        "prop_delays": _join(p.prop_delay for p in cfg.paths),
        "intervals": _join(cfg.policy.intervals),
        "coded_path": coded,
        "coded_interval": cfg.policy.intervals[coded] if coded is not None else None,
        "lambda": row.lam,
        "analytic_slots": row.analytic_slots,
        "analytic_seconds": row.analytic_seconds,
    }
    if res is not None:
        mean, sigma = res.mean_delay, res.std_delay
        excess_slots = res.mean_excess_slots
        rel = None
        if row.analytic_slots:
            rel = abs(excess_slots - row.analytic_slots) / row.analytic_slots
        rec.update(
            sim_mean_delay_s=mean,
            sim_sigma_delay_s=sigma,
            band_low_s=mean - 2 * sigma,
            band_high_s=mean + 2 * sigma,
            sim_mean_excess_s=res.mean_excess,
            sim_sigma_excess_s=res.std_excess,
            sim_mean_excess_slots=excess_slots,
            rel_delta=rel,
            throughput=res.throughput,
            completion_s=res.completion_time,
            renewals=res.renewals,
            erased=_join(res.erased),
        )
    rec["error"] = row.error or ""
    return {k: v if isinstance(v, str) else _num(v) for k, v in ((k, rec.get(k)) for k in COLUMNS)}


def render_csv(records: list[dict[str, str]]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(records)
    return buf.getvalue()


def render_json(records: list[dict[str, str]]) -> str:
    return json.dumps(records, indent=2) + "\n"


def summarize(records: list[dict[str, str]], manifest: RunManifest) -> dict[str, Any]:
    deltas = [
        {"point": int(r["point"]), "seed": int(r["seed"]), "rel_delta": float(r["rel_delta"])}
        for r in records
        if r["rel_delta"]
    ]
    statuses = [r["status"] for r in records]
    return {
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "config": str(manifest.config_path),
        "rows": len(records),
        "ok": statuses.count("ok"),
        "skipped": statuses.count("skipped"),
        "failed": statuses.count("failed"),
        "rel_delta": deltas,
        "max_rel_delta": max((d["rel_delta"] for d in deltas), default=None),
    }


def sweep_records(loaded: LoadedConfig, workers: int | None = None) -> list[dict[str, str]]:
    rows = sweep(loaded.base, loaded.full_grid(), workers=workers or loaded.workers)
    return [row_record(i, row) for i, row in enumerate(rows)]


def run_and_emit(manifest: RunManifest) -> int:
    try:
        loaded = load_config(manifest.config_path)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_INVALID
    if manifest.seed is not None:
        loaded = loaded.with_seed(manifest.seed)
    records = sweep_records(loaded, manifest.workers)

    manifest.out_dir.mkdir(parents=True, exist_ok=True)
    if manifest.fmt == "json":
        (manifest.out_dir / "results.json").write_text(render_json(records), encoding="utf-8")
    else:
        (manifest.out_dir / "results.csv").write_text(render_csv(records), encoding="utf-8")
    summary = summarize(records, manifest)
    (manifest.out_dir / "summary.json").write_text(
        json.dumps(summary, indent=2) + "\n", encoding="utf-8"
    )
    for r in records:
        if r["status"] == "failed":
            log.error("point %s (seed %s) failed: %s", r["point"], r["seed"], r["error"])
    log.info(
        "%d rows: %d ok, %d skipped, %d failed -> %s",
        summary["rows"],
        summary["ok"],
        summary["skipped"],
        summary["failed"],
        manifest.out_dir,
    )
    return EXIT_RUNTIME if summary["failed"] else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mpstream", description="Multi-path streaming code simulator and delay analysis"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a session or sweep described by a TOML file")
    run.add_argument("config", type=Path)
    run.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    run.add_argument("--seed", type=int, default=None, help="override session.seed")
    run.add_argument("--format", choices=("csv", "json"), default="csv", dest="fmt")
    run.add_argument("--workers", type=int, default=None, help="parallel sweep workers")
    run.add_argument("--check", action="store_true", help="validate the config and exit")
    run.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose or args.check else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    if args.seed is not None and not 0 <= args.seed < 2**64:
        log.error("--seed must be an unsigned 64-bit integer")
        return EXIT_INVALID
    if args.check:
        try:
            loaded = load_config(args.config)
        except ConfigError as exc:
            log.error("%s", exc)
            return EXIT_INVALID
        log.info("%s: ok, %d grid points", args.config, len(grid_points(loaded.full_grid())))
        return EXIT_OK
    return run_and_emit(RunManifest(args.config, args.out, args.seed, args.fmt, args.workers))


if __name__ == "__main__":
    sys.exit(main())
