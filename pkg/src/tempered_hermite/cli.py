"""Command-line interface.

Subcommands: ``simulate``, ``covariance``, ``operator``, ``verify`` and
``reproduce``. Every output file gets a JSON sidecar ``<stem>.json`` with the
parameters, grid, seed, method, package version and the argument list that
produced it; ``reproduce`` re-runs that argument list and compares bytes.

Binary grids are raw little-endian float64 in row-major order (``x`` index
slowest). Exit codes: 0 ok, 1 a check failed or output differs, 2 usage
error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .covariance import covariance_table
from .errors import (AliasingError, BudgetError, ConditioningError, DomainError, TruncationError,
                     UnsupportedError)
from .kernels import Field2D, FieldParams, Grid2D
from .simulate import METHODS, SamplerConfig, SeedSpec, default_noise_grid, sample_many, spectral_frequency_grid
from .tfcalc import FracOrder, frac_derivative_fourier, frac_derivative_pointwise, frac_integral, frac_integral_fourier

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3
THREADS_ENV = "TEMPERED_HERMITE_THREADS"


class UsageError(Exception):
    """Invalid arguments or configuration, reported before any computation."""


# ---------------------------------------------------------------- parsing helpers

def _pair(text: str, name: str, cast=float) -> tuple:
    parts = str(text).replace("x", ",").split(",")
    if len(parts) != 2:
        raise UsageError(f"--{name}: expected two comma-separated values, got {text!r}")
    try:
        vals = tuple(cast(p) for p in parts)
    except ValueError:
        raise UsageError(f"--{name}: cannot parse {text!r}") from None
    if cast is float and not all(math.isfinite(v) for v in vals):
        raise UsageError(f"--{name}: values must be finite")
    return vals


def _floats(text: str, name: str) -> list[float]:
    try:
        vals = [float(p) for p in str(text).split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"--{name}: cannot parse {text!r}") from None
    if not vals:
        raise UsageError(f"--{name}: need at least one value")
    return vals


@dataclass(frozen=True)
class RunConfig:
    """Validated field parameters, anchor grid and seed for one command."""

    params: FieldParams
    grid: Grid2D | None
    seed: SeedSpec | None

    @classmethod
    def from_args(cls, args, need_grid: bool = True, need_seed: bool = True) -> "RunConfig":
        H = _pair(args.h, "h")
        lam = _pair(args.lam, "lambda")
        try:
            params = FieldParams(int(args.k), H[0], H[1], lam[0], lam[1])
        except DomainError as exc:
            raise UsageError(f"field parameters: {exc}") from None
        grid = None
        if need_grid:
            n = _pair(args.grid, "grid", int)
            tmax = _pair(args.tmax, "tmax")
            if min(n) < 1 or min(tmax) <= 0:
                raise UsageError("--grid needs positive counts and --tmax positive extents")
            grid = Grid2D.from_extent(tmax, n)
        seed = None
        if need_seed:
            try:
                seed = SeedSpec(int(args.seed), int(args.stream))
            except (DomainError, ValueError) as exc:
                raise UsageError(f"--seed/--stream: {exc}") from None
        return cls(params, grid, seed)


def _sidecar_path(out: Path) -> Path:
    return out.with_suffix(".json")


def _write_sidecar(out: Path, payload: dict) -> None:
    path = _sidecar_path(out)
    try:
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror or exc}") from None


def _write_binary(out: Path, values: np.ndarray) -> None:
    try:
        out.write_bytes(np.ascontiguousarray(values, dtype="<f8").tobytes(order="C"))
    except OSError as exc:
        raise OSError(f"{out}: {exc.strerror or exc}") from None


def read_grid_file(path: Path) -> tuple[np.ndarray, dict]:
    """Read a raw float64 grid and its sidecar; returns ``(values, sidecar)``."""
    side = _sidecar_path(path)
    try:
        meta = json.loads(side.read_text())
        raw = np.frombuffer(path.read_bytes(), dtype="<f8")
    except OSError as exc:
        raise OSError(f"{exc.filename}: {exc.strerror}") from None
    g = meta["grid"]
    return raw.reshape(g["nx"], g["ny"]).copy(), meta


def write_pgm(path: Path, values: np.ndarray) -> None:
    """8-bit binary PGM heatmap, min-max normalized; rows are ``y`` from top."""
    v = np.asarray(values, dtype=float)
    lo, hi = float(v.min()), float(v.max())
    scaled = np.zeros_like(v) if hi <= lo else (v - lo) / (hi - lo)
    img = np.round(255.0 * scaled.T[::-1]).astype(np.uint8)
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode()
    path.write_bytes(header + img.tobytes())


def write_csv(path: Path, grid: Grid2D, values: np.ndarray) -> None:
    X, Y = grid.mesh()
    rows = ["t,s,value"] + [f"{x!r},{y!r},{v!r}" for x, y, v in zip(X.ravel(), Y.ravel(), values.ravel())]
    path.write_text("\n".join(rows) + "\n")


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return max(1, int(args.threads))
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be an integer") from None
    return 1


# ---------------------------------------------------------------- commands

def cmd_simulate(args, argv: Sequence[str]) -> int:
    cfg = RunConfig.from_args(args)
    out = Path(args.output)
    n_rep = int(args.replicates)
    if n_rep < 1:
        raise UsageError("--replicates must be >= 1")
    scfg = SamplerConfig()
    noise_grid = freq_grid = None
    if args.method in ("moving_average", "semimartingale"):
        noise_grid = default_noise_grid(cfg.params, cfg.grid, cell=args.noise_cell, tol=scfg.tail_tol)
    if args.method == "spectral":
        freq_grid = spectral_frequency_grid(cfg.params.lam, args.freq_cutoff, args.freq_modes)
    vals = sample_many(cfg.params, cfg.grid, cfg.seed, n_rep, args.method, noise_grid=noise_grid,
                       freq_grid=freq_grid, config=scfg, start=int(args.replicate))
    out_vals = vals[0] if n_rep == 1 else vals
    _write_binary(out, out_vals)
    meta = {
        "params": cfg.params.to_dict(),
        "grid": cfg.grid.to_dict(),
        "seed": {"seed": cfg.seed.seed, "stream": cfg.seed.stream, "replicate": int(args.replicate)},
        "replicates": n_rep,
        "method": args.method,
        "version": __version__,
        "command": list(argv),
        "format": {"dtype": "<f8", "order": "C", "shape": list(out_vals.shape)},
    }
    if noise_grid is not None:
        meta["noise_grid"] = noise_grid.to_dict()
    if freq_grid is not None:
        meta["freq_grid"] = freq_grid.to_dict()
    _write_sidecar(out, meta)
    if args.csv:
        write_csv(Path(args.csv), cfg.grid, vals[0])
    if args.pgm:
        write_pgm(Path(args.pgm), vals[0])
    return EXIT_OK


def cmd_covariance(args, argv: Sequence[str]) -> int:
    cfg = RunConfig.from_args(args, need_grid=False, need_seed=False)
    ts = _floats(args.ts, "ts")
    ss = _floats(args.ss, "ss")
    if min(ts + ss) < 0:
        raise UsageError("--ts/--ss must be nonnegative")
    rows = covariance_table(cfg.params, ts, ss)
    text = "t,s,u,v,cov\n" + "".join(f"{t!r},{s!r},{u!r},{v!r},{c!r}\n" for t, s, u, v, c in rows)
    out = Path(args.output)
    try:
        out.write_text(text)
    except OSError as exc:
        raise OSError(f"{out}: {exc.strerror or exc}") from None
    _write_sidecar(out, {"params": cfg.params.to_dict(), "ts": ts, "ss": ss, "version": __version__,
                         "command": list(argv)})
    return EXIT_OK


def cmd_operator(args, argv: Sequence[str]) -> int:
    values, meta = read_grid_file(Path(args.input))
    if values.ndim != 2:
        raise UsageError("--input must hold a single 2-D grid")
    g = meta["grid"]
    grid = Grid2D(g["x0"], g["y0"], g["dx"], g["dy"], g["nx"], g["ny"])
    a = _pair(args.alpha, "alpha")
    lam = _pair(args.lam, "lambda")
    try:
        order = FracOrder(a[0], a[1], lam[0], lam[1])
    except DomainError as exc:
        raise UsageError(f"operator order: {exc}") from None
    f = Field2D(grid, values)
    if args.op == "integral":
        res = frac_integral(order, args.side, f) if args.route == "time" else frac_integral_fourier(order, args.side, f)
    elif args.route == "time":
        res = frac_derivative_pointwise(order, args.side, f)
    else:
        res = frac_derivative_fourier(order, args.side, f)
    out = Path(args.output)
    _write_binary(out, res.values)
    _write_sidecar(out, {"grid": grid.to_dict(), "operator": args.op, "side": args.side, "route": args.route,
                         "order": {"alpha": list(a), "lambda": list(lam)}, "input": str(args.input),
                         "input_l2": f.l2_norm(), "output_l2": res.l2_norm(), "version": __version__,
                         "command": list(argv)})
    return EXIT_OK


def cmd_verify(args, argv: Sequence[str]) -> int:
    from .harness import SUITES, run_suites

    names = args.suite or list(SUITES)
    for n in names:
        if n not in SUITES:
            raise UsageError(f"--suite: unknown suite {n!r}; choose from {sorted(SUITES)}")
    start = time.perf_counter()
    results = run_suites(names, threads=_threads(args))
    elapsed = time.perf_counter() - start
    n_fail = sum(r.status == "fail" for r in results)
    lines = [f"{r.status.upper():4s}  {r.name}  statistic={r.statistic:.4g}  tolerance={r.tolerance:.4g}  {r.details}"
             for r in results]
    lines.append(f"{len(results)} checks, {n_fail} failed, {elapsed:.1f} s")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.json:
        Path(args.json).write_text(json.dumps({"version": __version__, "suites": names,
                                               "results": [r.to_dict() for r in results]}, indent=2) + "\n")
    if args.text:
        Path(args.text).write_text(text)
    return EXIT_FAIL if n_fail else EXIT_OK


def cmd_reproduce(args, argv: Sequence[str]) -> int:
    side = Path(args.sidecar)
    try:
        meta = json.loads(side.read_text())
    except OSError as exc:
        raise OSError(f"{side}: {exc.strerror}") from None
    command = list(meta.get("command") or [])
    if not command:
        raise UsageError(f"{side}: sidecar has no recorded command")
    target = Path(args.target) if args.target else _find_output(side, command)
    with tempfile.TemporaryDirectory() as tmp:
        fresh = Path(tmp) / target.name
        redo = _retarget(command, fresh)
        code = main(redo)
        if code != EXIT_OK:
            return code
        same = fresh.read_bytes() == target.read_bytes()
    sys.stdout.write(("identical" if same else "DIFFERENT") + f": {target}\n")
    return EXIT_OK if same else EXIT_FAIL


def _find_output(side: Path, command: list[str]) -> Path:
    for flag in ("-o", "--output"):
        if flag in command:
            rec = Path(command[command.index(flag) + 1])
            return side.with_name(rec.name)
    raise UsageError("recorded command has no output path")


def _retarget(command: list[str], fresh: Path) -> list[str]:
    out = list(command)
    for i, tok in enumerate(out):
        if tok in ("-o", "--output"):
            out[i + 1] = str(fresh)
        elif tok in ("--csv", "--pgm", "--json", "--text"):
            out[i + 1] = str(fresh.with_name(fresh.stem + "_aux" + Path(out[i + 1]).suffix))
    return out


# ---------------------------------------------------------------- parser

def _field_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, default=1, help="order of the field")
    p.add_argument("--h", default="0.7,0.7", help="Hurst exponents H1,H2 (each > 1/2)")
    p.add_argument("--lambda", dest="lam", default="1,1", help="tempering rates lambda1,lambda2 (> 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tempered-hermite",
                                     description="Tempered Hermite fields: sampling, covariance, operators, checks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="JSON file of default option values (keys are option names)")
    parser.add_argument("--threads", type=int, default=None,
                        help=f"cap on internal parallelism (default: ${THREADS_ENV} or 1)")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="sample the field on an anchor grid")
    _field_args(s)
    s.add_argument("--grid", default="32x32", help="anchor counts NXxNY")
    s.add_argument("--tmax", default="2,2", help="largest anchor per axis")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--stream", type=int, default=0)
    s.add_argument("--replicate", type=int, default=0, help="first replicate index")
    s.add_argument("--replicates", type=int, default=1, help="number of replicates stacked in the output")
    s.add_argument("--method", choices=METHODS, default="cholesky")
    s.add_argument("--noise-cell", type=float, default=None, help="noise cell side (default from lambda and spacing)")
    s.add_argument("--freq-cutoff", type=float, default=64.0, help="spectral cutoff times lambda")
    s.add_argument("--freq-modes", type=int, default=257, help="spectral modes per axis (odd)")
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--csv", help="also write t,s,value CSV of the first replicate")
    s.add_argument("--pgm", help="also write an 8-bit PGM heatmap of the first replicate")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("covariance", help="tabulate the covariance over a product set of anchors")
    _field_args(c)
    c.add_argument("--ts", default="0.5,1", help="comma-separated first-axis anchors")
    c.add_argument("--ss", default="0.5,1", help="comma-separated second-axis anchors")
    c.add_argument("-o", "--output", required=True)
    c.set_defaults(func=cmd_covariance)

    o = sub.add_parser("operator", help="apply a tempered fractional integral or derivative to a grid file")
    o.add_argument("--input", required=True, help="raw float64 grid with a JSON sidecar")
    o.add_argument("--op", choices=("integral", "derivative"), default="integral")
    o.add_argument("--side", choices=("plus", "minus"), default="plus")
    o.add_argument("--alpha", default="0.5,0.5")
    o.add_argument("--lambda", dest="lam", default="1,1")
    o.add_argument("--route", choices=("time", "fourier"), default="time")
    o.add_argument("-o", "--output", required=True)
    o.set_defaults(func=cmd_operator)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("--suite", action="append", help="suite name (repeatable): fractional, field_law, wiener")
    v.add_argument("--json", help="write the JSON report here")
    v.add_argument("--text", help="write the text summary here")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("reproduce", help="re-run the command recorded in a sidecar and compare bytes")
    r.add_argument("sidecar")
    r.add_argument("--target", help="file to compare against (default: the sidecar's output)")
    r.set_defaults(func=cmd_reproduce)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        data = json.loads(Path(known.config).read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{known.config}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    except OSError as exc:
        raise UsageError(f"{known.config}: {exc.strerror}") from None
    if not isinstance(data, dict):
        raise UsageError(f"{known.config}: top level must be an object")
    subs = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    valid = {a.dest for sp in subs.choices.values() for a in sp._actions}
    for key in data:
        if key.replace("-", "_") not in valid:
            raise UsageError(f"{known.config}: unknown field {key!r}")
    clean = {k.replace("-", "_"): v for k, v in data.items()}
    for sp in subs.choices.values():
        own = {a.dest for a in sp._actions}
        sp.set_defaults(**{k: v for k, v in clean.items() if k in own})
        for a in sp._actions:
            if a.dest in clean and a.required:
                a.required = False


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
        return args.func(args, argv)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except UnsupportedError as exc:
        sys.stderr.write(f"unsupported parameter range: {exc}\n")
        return EXIT_USAGE
    except DomainError as exc:
        sys.stderr.write(f"invalid input: {exc}\n")
        return EXIT_USAGE
    except (OSError, ConditioningError, BudgetError, AliasingError, TruncationError, RuntimeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
