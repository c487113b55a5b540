"""Command-line scenario runner.

`entangle-sense run --scenario fig3a --out results/` writes
`<out>/<scenario>.csv` (plot-ready data), `<out>/<scenario>.json`
(summary), and `<out>/<scenario>.meta.json` (run record).  Identical
(config, seed) pairs produce byte-identical CSV/JSON.

Exit codes: 0 success, 2 config parse/validation failure, 3 one or more
fits failed to converge (partial outputs are still written).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import write_curve_csv
from .config import ConfigError, SCENARIOS, resolve, validate
from .scenarios import SCENARIO_RUNNERS

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NO_CONVERGENCE = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entangle-sense",
        description="Two-spin entanglement-enhanced magnetometry simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario and write CSV/JSON outputs")
    run_p.add_argument("--scenario", choices=SCENARIOS, help="scenario to run")
    run_p.add_argument("--config", type=Path, help="JSON config file merged over defaults")
    run_p.add_argument(
        "--out",
        type=Path,
        default=None,
        help="output directory (default: $ENTANGLE_SENSE_OUT or the working directory)",
    )
    run_p.add_argument("--seed", type=int, default=None, help="override rng seed")
    run_p.add_argument(
        "--trajectories", type=int, default=None, help="override simulated shot count"
    )
    run_p.add_argument("--quiet", action="store_true", help="suppress progress output")

    val_p = sub.add_parser("validate", help="check a config file and list every violation")
    val_p.add_argument("config", type=Path, help="JSON config file")
    return parser


def _run(args: argparse.Namespace) -> int:
    config_text = None
    if args.config is not None:
        try:
            config_text = args.config.read_text()
        except OSError as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    try:
        cfg = resolve(
            scenario=args.scenario,
            config_text=config_text,
            seed=args.seed,
            trajectories=args.trajectories,
        )
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    scenario = cfg["scenario"]
    out_dir = args.out
    if out_dir is None:
        env = os.environ.get("ENTANGLE_SENSE_OUT")
        out_dir = Path(env) if env else Path.cwd()
    out_dir.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(int(cfg["run.seed"]))
    started = time.time()
    columns, summary = SCENARIO_RUNNERS[scenario](cfg, rng)
    elapsed = time.time() - started

    csv_path = out_dir / f"{scenario}.csv"
    json_path = out_dir / f"{scenario}.json"
    meta_path = out_dir / f"{scenario}.meta.json"

    write_curve_csv(str(csv_path), columns)
    payload = {"scenario": scenario, "summary": summary, "config": cfg.data}
    json_path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    meta = {
        "config_hash_sha256": cfg.content_hash(),
        "outputs": [csv_path.name, json_path.name, meta_path.name],
        "wall_clock_s": elapsed,
        "version": __version__,
    }
    meta_path.write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")

    converged = bool(summary.get("converged", True))
    if not args.quiet:
        status = "ok" if converged else "non-convergent fit(s)"
        print(f"{scenario}: wrote {csv_path}, {json_path} ({status}, {elapsed:.2f} s)")
    return EXIT_OK if converged else EXIT_NO_CONVERGENCE


def _validate(args: argparse.Namespace) -> int:
    try:
        text = args.config.read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        print(
            f"error: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
            file=sys.stderr,
        )
        return EXIT_CONFIG
    if not isinstance(data, dict):
        print("error: top level must be a JSON object", file=sys.stderr)
        return EXIT_CONFIG

    from .config import DEFAULTS, _merge

    diagnostics: list[str] = []
    merged = _merge(DEFAULTS, data, "", diagnostics)
    if "scenario" in data or merged.get("scenario") is not None:
        diagnostics.extend(validate(merged))
    else:
        diagnostics.extend(d for d in validate(merged) if not d.startswith("scenario"))
    # a config that nulls out a required parameter must name it
    if len(diagnostics) == 0:
        print("config is valid")
        return EXIT_OK
    for diag in diagnostics:
        print(diag)
    return EXIT_CONFIG


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _run(args)
    return _validate(args)


if __name__ == "__main__":
    sys.exit(main())
