"""Command-line front end.

    ehcrn solve --config CFG --out TABLES.json
    ehcrn run --config CFG --preset NAME --trials K --seed S --out OUT.csv

Exit codes: 0 success, 1 config error, 2 I/O error, 3 internal invariant failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

from . import __version__
from .domain import ConfigError, SystemConfig, load_config, validate_config
from .experiments import PRESETS, TableCache, run_preset
from .online import TableFormatError, backward_induction, load_tables, save_tables
from .simulator import INITIAL_HARVEST_STATE, InvariantViolation

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_INVARIANT = 0, 1, 2, 3


def version_string() -> str:
    return f"v{__version__}"


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    return format(float(x), ".17g")


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def _load(path: str | None) -> SystemConfig:
    if path is None:
        return validate_config(SystemConfig())
    return load_config(path)


def cmd_solve(config_path: str | None, out_path: str) -> int:
    cfg = _load(config_path)
    t0 = time.perf_counter()
    table, _ = backward_induction(cfg)
    elapsed = time.perf_counter() - t0
    save_tables(table, cfg, out_path)
    n, m, l = cfg.n_slots, cfg.n_harvest_states, cfg.n_battery_levels
    print(f"tables: {n} stages x ({m} x {l}) = {n} x {m * l} states; built in {elapsed:.2f} s")
    print(f"wrote {out_path}")
    return EXIT_OK


def cmd_run(
    config_path: str | None,
    preset: str,
    n_trials: int,
    seed: int | None,
    out_csv: str,
    tables_path: str | None = None,
) -> int:
    if preset not in PRESETS:
        raise ConfigError("preset", f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    if n_trials < 1:
        raise ConfigError("trials", "must be >= 1")
    cfg = _load(config_path)
    if seed is not None:
        cfg = validate_config(cfg.replace(rng_seed=seed))
    cache = TableCache()
    if tables_path is not None:
        if not Path(tables_path).exists():
            raise FileNotFoundError(f"table artifact missing: {tables_path}")
        _, pol = load_tables(tables_path)
        cache = TableCache(pol)
    table = run_preset(preset, cfg, n_trials, cache)
    out = Path(out_csv)
    out.write_text(render_csv(table.header, table.rows))
    meta = {
        "preset": preset,
        "seed": cfg.rng_seed,
        "trials": n_trials,
        "version": version_string(),
        "config": cfg.to_dict(),
        "initial_harvest_state": INITIAL_HARVEST_STATE,
        "columns": table.header,
        "rows": len(table.rows),
        **table.notes,
    }
    meta_path = out.with_name(out.name + ".meta.json")
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out} ({len(table.rows)} rows) and {meta_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ehcrn", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=version_string())
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="build and save online value tables")
    s.add_argument("--config", help="TOML or JSON config (default: built-in defaults)")
    s.add_argument("--out", required=True)

    r = sub.add_parser("run", help="run an experiment preset and write CSV")
    r.add_argument("--config")
    r.add_argument("--preset", required=True, help=", ".join(PRESETS))
    r.add_argument("--trials", type=int, default=1000)
    r.add_argument("--seed", type=int)
    r.add_argument("--out", required=True)
    r.add_argument("--tables", help="reuse a table artifact written by 'solve'")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            return cmd_solve(args.config, args.out)
        return cmd_run(args.config, args.preset, args.trials, args.seed, args.out, args.tables)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, TableFormatError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except InvariantViolation as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
