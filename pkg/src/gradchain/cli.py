"""Command-line front end: chain, couplings, spectrum, simulate, sweep.

Every command is a pure function of its input files, flags and seed.
Outputs are byte-reproducible; JSON files carry one ISO-8601 timestamp
field (and simulate a wall-time field) that --no-timestamp suppresses.
Frequencies in all outputs are ordinary Hz; CSV numbers use 12
significant digits.

Exit codes: 0 success, 2 input error, 3 numeric failure, 4 program parse
error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import math
import os
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import chain as chain_mod
from . import coupling as coupling_mod
from . import pulse as pulse_mod
from .config import ConfigError, OutOfProfileRangeError, TrapConfig, load_config, validate_config
from .constants import UnknownSpeciesError
from .units import QuantityError, parse_quantity

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_PROGRAM = 4

_INPUT_ERRORS = (ConfigError, UnknownSpeciesError, QuantityError, OutOfProfileRangeError, OSError, ValueError)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


def _write_json(path: Path, doc: dict, with_timestamp: bool) -> None:
    if with_timestamp:
        doc = dict(doc)
        doc["generated_at"] = _timestamp()
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_matrix_csv(path: Path, matrix: np.ndarray, row_label: str) -> None:
    n_rows, n_cols = matrix.shape
    lines = [row_label + "," + ",".join(str(i + 1) for i in range(n_cols))]
    for r in range(n_rows):
        lines.append(str(r + 1) + "," + ",".join(_fmt(matrix[r, c]) for c in range(n_cols)))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _solve(config: TrapConfig) -> chain_mod.ChainSolution:
    return chain_mod.solve_chain(config)


def cmd_chain(args) -> int:
    config = load_config(args.config)
    solution = _solve(config)
    if args.out:
        _write_json(Path(args.out), solution.to_json_dict(), not args.no_timestamp)

    print(f"ion chain: {config.species.name}, N={config.ion_count}, "
          f"nu1/2pi = {_fmt(config.axial_frequency_hz)} Hz")
    print(f"length scale zeta = {solution.length_scale * 1e6:.4f} um")
    print()
    print("ion   position (um)")
    for i, z in enumerate(solution.positions_m, start=1):
        print(f"{i:3d}   {z * 1e6:12.4f}")
    if config.ion_count > 1:
        print(f"\nmin spacing = {solution.min_spacing_m() * 1e6:.4f} um")
    print("\nmode   frequency (kHz)")
    for j, nu in enumerate(solution.mode_frequencies, start=1):
        print(f"{j:4d}   {nu / (2 * math.pi) / 1e3:12.6f}")
    for note in solution.warnings:
        print(f"warning: {note}", file=sys.stderr)
    return EXIT_OK


def cmd_couplings(args) -> int:
    config = load_config(args.config)
    solution = _solve(config)
    report = coupling_mod.build_report(config, solution)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    two_pi = 2.0 * math.pi
    _write_matrix_csv(out_dir / "j_matrix.csv", report.j_matrix / two_pi, "ion")
    _write_matrix_csv(out_dir / "epsilon_matrix.csv", report.epsilon_matrix, "mode")
    _write_json(out_dir / "report.json", report.to_json_dict(), not args.no_timestamp)

    verdict = "valid" if report.harmonic_approximation_valid else "NOT valid"
    print(f"validity epsilon = {report.validity:.6g} "
          f"(harmonic approximation {verdict} at threshold {coupling_mod.VALIDITY_THRESHOLD})")
    if config.ion_count > 1:
        print(f"max |J|/2pi = {_fmt(float(np.max(np.abs(report.j_matrix))) / two_pi)} Hz")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    config = load_config(args.config)
    if not 1 <= args.ion <= config.ion_count:
        print(f"error: ion index {args.ion} out of range [1, {config.ion_count}]", file=sys.stderr)
        return EXIT_INPUT
    solution = _solve(config)
    report = coupling_mod.build_report(config, solution)
    lines = coupling_mod.sideband_spectrum(config, solution, report, args.ion)

    base = report.qubit_frequencies[args.ion - 1]
    rows = ["offset_hz,amplitude,label"]
    plot_rows = []
    for line in lines:
        offset_hz = (line.frequency - base) / (2.0 * math.pi)
        rows.append(f"{_fmt(offset_hz)},{_fmt(line.amplitude)},{line.label}")
        plot_rows.append(f"{_fmt(offset_hz)} {_fmt(line.amplitude)}")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(rows) + "\n", encoding="utf-8")
    if args.emit_plot_data:
        out.with_suffix(out.suffix + ".dat").write_text("\n".join(plot_rows) + "\n", encoding="utf-8")
    print(f"wrote {len(lines)} spectral lines for ion {args.ion}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = load_config(args.config)
    try:
        source = Path(args.program).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read program: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        program = pulse_mod.parse(source)
    except pulse_mod.PulseProgramError as exc:
        print(f"error: {args.program}:{exc}", file=sys.stderr)
        return EXIT_PROGRAM

    solution = _solve(config)
    report = coupling_mod.build_report(config, solution)
    initial = args.initial if args.initial is not None else "0" * config.ion_count
    record = pulse_mod.interpret(
        program, config, solution, report, initial, seed=args.seed, shots=args.shots
    )

    out = Path(args.out)
    _write_json(out, record.to_json_dict(include_timing=not args.no_timestamp), not args.no_timestamp)

    hist_path = out.with_name(out.stem + "_hist.csv")
    if record.measurements:
        counts = record.measurements[-1]["counts"]
    else:
        rng = np.random.default_rng(args.seed)
        counts = pulse_mod.marginal_counts(
            record.final_state, tuple(range(1, record.n_qubits + 1)), rng, args.shots
        )
    rows = ["outcome,count"]
    for outcome in sorted(counts):
        rows.append(f"{outcome},{counts[outcome]}")
    hist_path.write_text("\n".join(rows) + "\n", encoding="utf-8")

    if record.expectation_log:
        log_rows = ["time_s,observable,ion,value"]
        plot_rows = []
        for entry in record.expectation_log:
            log_rows.append(f"{_fmt(entry['time_s'])},{entry['observable']},"
                            f"{entry['ion']},{_fmt(entry['value'])}")
            plot_rows.append(f"{_fmt(entry['time_s'])} {_fmt(entry['value'])}")
        log_path = out.with_name(out.stem + "_log.csv")
        log_path.write_text("\n".join(log_rows) + "\n", encoding="utf-8")
        if args.emit_plot_data:
            log_path.with_suffix(".dat").write_text("\n".join(plot_rows) + "\n", encoding="utf-8")

    print(f"simulated {len(program.instructions)} instructions, "
          f"sequence duration {record.total_time_s:.6g} s")
    return EXIT_OK


_SWEEP_QUANTITIES = ("max_J", "epsilon", "min_spacing")


@dataclass(frozen=True)
class SweepSpec:
    """One-parameter scan: config path to vary, range, and output quantity."""

    parameter: str   # dotted path into the raw config, e.g. field.uniform.b
    start: float
    stop: float
    steps: int
    scale: str       # linear | log
    quantity: str    # max_J | epsilon | min_spacing | delta_shift[j]

    def __post_init__(self):
        if self.steps < 2:
            raise ValueError(f"sweep needs steps >= 2, got {self.steps}")
        if self.start == self.stop:
            raise ValueError("sweep endpoints must differ")
        if self.scale not in ("linear", "log"):
            raise ValueError(f"scale must be linear or log, got {self.scale!r}")
        if self.scale == "log" and self.start * self.stop <= 0.0:
            raise ValueError("log sweeps need nonzero endpoints of the same sign")

    def values(self) -> np.ndarray:
        if self.scale == "log":
            sign = math.copysign(1.0, self.start)
            return sign * np.logspace(
                math.log10(abs(self.start)), math.log10(abs(self.stop)), self.steps
            )
        return np.linspace(self.start, self.stop, self.steps)


def _sweep_value(quantity: str, config: TrapConfig) -> float:
    solution = _solve(config)
    if quantity == "min_spacing":
        return solution.min_spacing_m()
    report = coupling_mod.build_report(config, solution)
    if quantity == "max_J":
        return float(np.max(np.abs(report.j_matrix))) / (2.0 * math.pi)
    if quantity == "epsilon":
        return report.validity
    if quantity.startswith("delta_shift[") and quantity.endswith("]"):
        ion = int(quantity[len("delta_shift["):-1])
        if not 1 <= ion <= config.ion_count:
            raise ValueError(f"delta_shift ion index {ion} out of range")
        return float(report.shifts[ion - 1]) / (2.0 * math.pi)
    raise ValueError(
        f"unknown sweep quantity {quantity!r} "
        f"(supported: {', '.join(_SWEEP_QUANTITIES)}, delta_shift[j])"
    )


def _set_path(raw: dict, dotted: str, value: float) -> None:
    parts = dotted.split(".")
    node = raw
    for part in parts[:-1]:
        if not isinstance(node, dict) or part not in node:
            raise ValueError(f"sweep parameter path {dotted!r} not present in config")
        node = node[part]
    if not isinstance(node, dict) or parts[-1] not in node:
        raise ValueError(f"sweep parameter path {dotted!r} not present in config")
    node[parts[-1]] = value


def _parse_sweep_bound(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        value, _ = parse_quantity(text)
        return value


def cmd_sweep(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        raw = json.load(fh)
    validate_config(raw)  # fail early on a bad base config

    spec = SweepSpec(
        parameter=args.param,
        start=_parse_sweep_bound(getattr(args, "from")),
        stop=_parse_sweep_bound(args.to),
        steps=args.steps,
        scale=args.scale,
        quantity=args.quantity,
    )
    values = spec.values()

    def evaluate(value: float) -> float:
        point_raw = json.loads(json.dumps(raw))
        _set_path(point_raw, spec.parameter, float(value))
        return _sweep_value(spec.quantity, validate_config(point_raw))

    workers = int(os.environ.get("GRADCHAIN_THREADS", "0")) or min(8, os.cpu_count() or 1)
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(evaluate, values))

    rows = [f"{spec.parameter},{spec.quantity}"]
    plot_rows = []
    for value, result in zip(values, results):
        rows.append(f"{_fmt(value)},{_fmt(result)}")
        plot_rows.append(f"{_fmt(value)} {_fmt(result)}")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(rows) + "\n", encoding="utf-8")
    if args.emit_plot_data:
        out.with_suffix(out.suffix + ".dat").write_text("\n".join(plot_rows) + "\n", encoding="utf-8")
    print(f"swept {args.param} over {args.steps} points -> {args.quantity}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gradchain",
        description="Magnetic-gradient ion chain: geometry, couplings, spectra, spin dynamics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="trap config JSON file")
        p.add_argument("--no-timestamp", action="store_true",
                       help="omit timestamp/wall-time fields for byte-reproducible output")
        p.add_argument("--emit-plot-data", action="store_true",
                       help="also write gnuplot-ready two-column .dat files")

    p = sub.add_parser("chain", help="solve equilibrium geometry and normal modes")
    common(p)
    p.add_argument("--out", help="write ChainSolution JSON here")
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("couplings", help="compute J/epsilon matrices, shifts, validity")
    common(p)
    p.add_argument("--out-dir", required=True, help="directory for CSV/JSON outputs")
    p.set_defaults(func=cmd_couplings)

    p = sub.add_parser("spectrum", help="microwave sideband stick spectrum of one ion")
    common(p)
    p.add_argument("--ion", type=int, required=True)
    p.add_argument("--out", required=True, help="CSV output path")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("simulate", help="run a pulse program")
    common(p)
    p.add_argument("--program", required=True, help=".pp pulse program file")
    p.add_argument("--initial", default=None, help="initial basis label, default all zeros")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shots", type=int, default=100)
    p.add_argument("--out", required=True, help="RunRecord JSON path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="sweep one config parameter, tabulate one quantity")
    common(p)
    p.add_argument("--param", required=True, help="config path, e.g. field.uniform.b or nu1")
    p.add_argument("--from", required=True, help="start value (quantity or SI number)")
    p.add_argument("--to", required=True, help="end value")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--scale", choices=("linear", "log"), default="linear")
    p.add_argument("--quantity", required=True,
                   help="max_J | epsilon | min_spacing | delta_shift[j]")
    p.add_argument("--out", required=True, help="CSV output path")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (chain_mod.SolverError, pulse_mod.ProgramRuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except pulse_mod.PulseProgramError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PROGRAM
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
