"""Command-line front end for the experiment harness."""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from .harness import (
    BACKENDS,
    TABLE2_ROWS,
    ExperimentResult,
    ExperimentSpec,
    run_experiment,
    write_results,
)
from .noise import baseline_params, load_noise_config

_TABLE2_SHOTS = {(na, nd): shots for na, nd, shots in TABLE2_ROWS}
# Off-table registers default to 3125 shots per address value.
_SHOTS_PER_ADDRESS = 3125


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcrank-dpqa",
        description=(
            "Encode random sequences on a movable-atom register, simulate "
            "them under Pauli noise and report reconstruction accuracy."
        ),
    )
    parser.add_argument("--na", type=int, help="number of address qubits")
    parser.add_argument("--nd", type=int, help="number of data qubits (divisible by --na)")
    parser.add_argument("--shots", type=int, help="shots per run (default: published budget)")
    parser.add_argument("--backend", choices=BACKENDS, default="auto")
    parser.add_argument(
        "--noise-scale",
        type=float,
        action="append",
        metavar="S",
        help="noise scale factor, repeatable (default: 1.0)",
    )
    parser.add_argument("--sequences", type=int, default=10, help="random sequences per cell")
    parser.add_argument("--seed", type=int, default=12345, help="base seed")
    parser.add_argument("--out", type=Path, default=Path("results"), metavar="DIR")
    parser.add_argument("--table2", action="store_true", help="run the full nine-cell sweep")
    parser.add_argument("--dump-schedule", action="store_true", help="emit instruction streams")
    parser.add_argument("--noise-config", type=Path, help="key-value noise overrides")
    parser.add_argument(
        "--plots",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="render figures alongside the CSV",
    )
    return parser


def _cells(args: argparse.Namespace) -> tuple[tuple[int, int, int], ...]:
    if args.table2:
        if args.na is not None or args.nd is not None:
            raise SystemExit("--table2 and --na/--nd are mutually exclusive")
        if args.shots is not None:
            return tuple((na, nd, args.shots) for na, nd, _ in TABLE2_ROWS)
        return TABLE2_ROWS
    if args.na is None or args.nd is None:
        raise SystemExit("either --table2 or both --na and --nd are required")
    shots = args.shots
    if shots is None:
        shots = _TABLE2_SHOTS.get((args.na, args.nd), _SHOTS_PER_ADDRESS * 2**args.na)
    return ((args.na, args.nd, shots),)


def _summarize(result: ExperimentResult) -> list[str]:
    groups: dict[tuple[str, float], list] = {}
    for row in result.rows:
        groups.setdefault((row.cfg_id, row.noise_scale), []).append(row)
    lines = []
    for (cfg_id, scale), rows in sorted(groups.items()):
        rmse_vals = np.array([r.rmse_calibrated for r in rows])
        ranges = np.array([1.0 / r.calibration for r in rows])
        lines.append(
            f"{cfg_id} scale {scale:g}: rmse_calibrated "
            f"{rmse_vals.mean():.4f} +/- {rmse_vals.std():.4f} "
            f"({len(rows)} seq), dynamic range {ranges.mean():.3f}"
        )
    return lines


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    noise = load_noise_config(args.noise_config) if args.noise_config else baseline_params()
    spec = ExperimentSpec(
        cells=_cells(args),
        noise_scales=tuple(args.noise_scale) if args.noise_scale else (1.0,),
        backend=args.backend,
        sequences=args.sequences,
        base_seed=args.seed,
        noise=noise,
        out_dir=str(args.out),
        dump_schedules=args.dump_schedule,
    )
    result = run_experiment(spec)
    csv_path = write_results(result, spec, args.out)
    written = [csv_path, csv_path.with_name("results.meta.json")]
    written += [args.out / f"schedule_{cfg_id}.txt" for cfg_id in result.schedule_texts]
    if args.plots:
        from .figures import render_report

        written += render_report(result, args.out)
    for line in _summarize(result):
        print(line)
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
