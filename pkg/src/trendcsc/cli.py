"""Command-line surface: simulate, fit, benchmark, score.

Exit codes: 0 success, 1 usage error, 2 malformed data or config,
3 solver non-convergence under --strict.
"""

import argparse
import dataclasses
import os
import sys

import numpy as np

from .benchmark import TV_WEIGHT_RULE, BenchmarkSpec, run_benchmark, summarize, tv_weight
from .fileio import (
    DataError,
    atomic_write,
    read_config,
    read_matrix,
    read_recording,
    solver_config_from_mapping,
    write_config,
    write_matrix,
    write_recording,
    write_triplets,
)
from .metrics import recovery_score
from .model import Signal, SolverConfig
from .simulate import SyntheticParams, gen_signal
from .solver import fit

__all__ = ["main", "run"]


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; the CLI contract reserves 2
    # for data errors, so usage problems remap to 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="trendcsc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_sim = sub.add_parser("simulate", help="generate a synthetic recording")
    p_sim.add_argument("--params", help="key = value file of generator parameters")
    p_sim.add_argument("--seed", type=int, help="override the generator seed")
    p_sim.add_argument("--out", required=True, help="output directory")

    p_fit = sub.add_parser("fit", help="decompose a recording")
    p_fit.add_argument("signal", help="recording CSV (time_ms,angle_deg,eye,axis)")
    p_fit.add_argument("--config", help="key = value solver configuration")
    p_fit.add_argument("--out", required=True, help="output directory")
    p_fit.add_argument("--mode", choices=("joint", "init", "none"))
    p_fit.add_argument("--lambda-frac", type=float, dest="lambda_frac")
    p_fit.add_argument("--lambda-tv", type=float, dest="lambda_tv")
    p_fit.add_argument("--seed", type=int)
    p_fit.add_argument("--k", type=int, help="number of atoms (default from config or 1)")
    p_fit.add_argument("--w", type=int, help="atom length (default from config or 120)")
    p_fit.add_argument("--strict", action="store_true",
                       help="exit 3 when the solver does not converge")

    p_bench = sub.add_parser("benchmark", help="recovery sweep over synthetic signals")
    p_bench.add_argument("--spec", help="key = value benchmark description")
    p_bench.add_argument("--out", required=True, help="output directory")
    p_bench.add_argument("--jobs", type=int, default=1, help="concurrent fits")
    p_bench.add_argument("--strict", action="store_true",
                         help="exit 3 when any fit does not converge")

    p_score = sub.add_parser("score", help="recovery score between two pattern files")
    p_score.add_argument("pattern", help="single-column CSV of the reference pattern")
    p_score.add_argument("atoms", help="CSV of learned atoms, one column per atom")
    return parser


def _ensure_out_dir(path: str) -> None:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create output directory {path}: {exc}") from exc


def _float_key(mapping, key, path):
    try:
        return float(mapping[key])
    except ValueError:
        raise DataError(f"{path}: {key} is not a number: {mapping[key]!r}") from None


def _int_key(mapping, key, path):
    try:
        return int(mapping[key])
    except ValueError:
        raise DataError(f"{path}: {key} is not an integer: {mapping[key]!r}") from None


def _cmd_simulate(args) -> int:
    mapping = read_config(args.params) if args.params else {}
    try:
        params = SyntheticParams.from_mapping(mapping)
        if args.seed is not None:
            params = dataclasses.replace(params, seed=args.seed)
    except ValueError as exc:
        raise DataError(f"invalid generator parameters: {exc}") from exc
    signal, truth = gen_signal(params)

    _ensure_out_dir(args.out)
    out = lambda name: os.path.join(args.out, name)
    write_recording(out("signal.csv"), signal.samples)
    write_matrix(
        out("components.csv"),
        np.column_stack([truth.trend.values, truth.nystagmus, truth.noise]),
        ["trend", "nystagmus", "noise"],
    )
    write_matrix(out("pattern.csv"), truth.pattern, ["pattern"])
    write_config(out("params.txt"), dataclasses.asdict(params))
    write_config(
        out("truth.txt"),
        {
            "nystagmus_kind": params.nystagmus_kind,
            "frequency": truth.frequency,
            "amplitude": truth.amplitude,
            "saccade_times": [int(t) for t in truth.saccade_times],
        },
    )
    print(f"wrote {params.n_samples}-sample signal to {args.out}")
    return 0


def _resolve_fit_setup(args):
    mapping = read_config(args.config) if args.config else {}
    config = solver_config_from_mapping(mapping)
    k = _int_key(mapping, "k", args.config) if "k" in mapping else 1
    w = _int_key(mapping, "w", args.config) if "w" in mapping else 120
    overrides = {}
    for name in ("mode", "lambda_frac", "lambda_tv", "seed"):
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    try:
        if overrides:
            config = dataclasses.replace(config, **overrides)
        if args.k is not None:
            k = args.k
        if args.w is not None:
            w = args.w
        if k < 1 or w < 2:
            raise ValueError(f"need k >= 1 and w >= 2, got k={k}, w={w}")
    except ValueError as exc:
        raise DataError(f"invalid solver configuration: {exc}") from exc
    return config, k, w


def _cmd_fit(args) -> int:
    samples, eye, axis = read_recording(args.signal)
    config, k, w = _resolve_fit_setup(args)
    if w > samples.size:
        raise DataError(f"atom length {w} exceeds the {samples.size}-sample signal")
    signal = Signal(samples)
    dec = fit(signal, k, w, config)

    _ensure_out_dir(args.out)
    out = lambda name: os.path.join(args.out, name)
    atoms = dec.dictionary.atoms
    write_matrix(out("atoms.csv"), atoms.T, [f"atom_{i}" for i in range(k)])
    write_triplets(out("activations.csv"), dec.activations.maps)
    write_matrix(out("trend.csv"), dec.trend.values, ["trend"])
    write_matrix(out("residual.csv"), dec.residual, ["residual"])
    write_matrix(out("objective.csv"), dec.objective_trace, ["objective"])

    manifest = dict(dataclasses.asdict(config))
    manifest["epsilon"] = dec.epsilon_value
    manifest.update(
        k=k,
        w=w,
        lambda_abs=dec.lambda_value,
        lambda_max=dec.lambda_max_value,
        n_samples=samples.size,
        eye=eye,
        axis=axis,
        converged=dec.converged,
        iterations_run=dec.iterations_run,
    )
    write_config(out("manifest.txt"), manifest)

    print(
        f"mode={config.mode} lambda={dec.lambda_value:.6g} "
        f"iterations={dec.iterations_run} converged={dec.converged}"
    )
    if args.strict and not dec.converged:
        print("solver did not converge within max_iter", file=sys.stderr)
        return 3
    return 0


def _cmd_benchmark(args) -> int:
    mapping = read_config(args.spec) if args.spec else {}
    try:
        spec = BenchmarkSpec.from_mapping(mapping)
    except ValueError as exc:
        raise DataError(f"invalid benchmark spec: {exc}") from exc
    if args.jobs < 1:
        raise DataError(f"jobs must be >= 1, got {args.jobs}")

    rows = run_benchmark(spec, jobs=args.jobs)
    summary = summarize(rows)

    _ensure_out_dir(args.out)
    out = lambda name: os.path.join(args.out, name)
    lines = ["mode,lambda_tv,seed,rho"]
    for row in rows:
        lines.append(f"{row.mode},{row.lambda_tv!r},{row.seed},{row.rho!r}")
    atomic_write(out("results.csv"), "\n".join(lines) + "\n")

    lines = ["mode,lambda_tv,n,failures,median_rho,q25_rho,q75_rho"]
    for cell in summary:
        lines.append(
            "%s,%r,%d,%d,%r,%r,%r"
            % (
                cell["mode"], cell["lambda_tv"], cell["n"], cell["failures"],
                cell["median_rho"], cell["q25_rho"], cell["q75_rho"],
            )
        )
    atomic_write(out("summary.csv"), "\n".join(lines) + "\n")

    manifest = dict(dataclasses.asdict(spec))
    manifest["tv_weight_rule"] = TV_WEIGHT_RULE
    manifest["lambda_tv_abs"] = [tv_weight(rel) for rel in spec.lambda_tv_grid]
    write_config(out("manifest.txt"), manifest)

    print("mode     lambda_tv  n   fail  median   q25      q75")
    for cell in summary:
        print(
            "%-8s %-9.3g  %-3d %-5d %-8.3f %-8.3f %-8.3f"
            % (
                cell["mode"], cell["lambda_tv"], cell["n"], cell["failures"],
                cell["median_rho"], cell["q25_rho"], cell["q75_rho"],
            )
        )
    if args.strict and any(not row.converged for row in rows):
        print("at least one fit did not converge", file=sys.stderr)
        return 3
    return 0


def _cmd_score(args) -> int:
    _, pattern = read_matrix(args.pattern)
    if pattern.shape[1] != 1:
        raise DataError(f"{args.pattern}: expected a single pattern column")
    names, atoms = read_matrix(args.atoms)
    for name, atom in zip(names, atoms.T):
        try:
            score = recovery_score(pattern[:, 0], atom)
        except ValueError as exc:
            raise DataError(f"{args.atoms}: column {name}: {exc}") from exc
        print(f"{name}: rho={score.rho!r} shift={score.best_shift} offset={score.best_offset}")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "fit": _cmd_fit,
    "benchmark": _cmd_benchmark,
    "score": _cmd_score,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except DataError as exc:
        print(f"trendcsc: error: {exc}", file=sys.stderr)
        return 2


def run() -> None:
    raise SystemExit(main())
