"""Command-line entry point: ``construct``, ``sweep`` and ``demo-necessity``.

Exit codes: 0 pass, 2 tolerance fail, 3 builder contract violation,
4 I/O error, 5 usage error.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import activations as acts
from .ansatz import dumps_params, tabulate
from .constructors import BUILDERS, DEFAULT_ACTIVATION, construct, general_parts
from .errors import ContractError, DegeneracyError, DomainError, RangeError
from .fockspace import WavefunctionTable
from .verify import (check_construction, compare, fourier_residual, random_target, sector_projection,
                     sweep_csv, sweep_row)

EXIT_PASS, EXIT_FAIL, EXIT_CONTRACT, EXIT_IO, EXIT_USAGE = 0, 2, 3, 4, 5
DEFAULT_TOLERANCE = {"fnn": 1e-10, "nnbf": 1e-8, "nps-sat": 1e-6, "nps-general": 1e-2}
THREADS_ENV = "NQS_UAT_THREADS"


class UsageError(Exception):
    pass


class InputError(Exception):
    """Unreadable or malformed input file."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    K: Optional[int] = None
    seed: int = 0
    builder: str = "fnn"
    activation: Optional[str] = None
    theta: Optional[float] = None
    delta: float = 1e-4
    omega_scale: float = 0.5
    eps_zero: float = 1e-3
    N: Optional[int] = None
    tolerance: Optional[float] = None
    input: Optional[str] = None
    output: Optional[str] = None
    report: Optional[str] = None
    format: str = "json"
    random: bool = False
    seeds: list[int] = field(default_factory=list)
    grid: list[float] = field(default_factory=list)
    timing: bool = True
    g: float = 1.0

    def validate(self):
        if self.theta is not None and not self.theta > 0:
            raise UsageError("--theta must be positive")
        if not self.delta > 0:
            raise UsageError("--delta must be positive")
        if not self.omega_scale > 0:
            raise UsageError("--omega-scale must be positive")
        if not 0 < self.eps_zero < 1:
            raise UsageError("--eps-zero must lie in (0, 1)")
        if self.K is not None and not 1 <= self.K <= 20:
            raise UsageError("--K must lie in [1, 20]")
        if self.random and self.input:
            raise UsageError("--random and --input are mutually exclusive")
        if self.activation is not None:
            try:
                acts.get_activation(self.activation)
            except ValueError as exc:
                raise UsageError(str(exc)) from None


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nqs-uat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--K", type=int)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--activation")
        p.add_argument("--theta", type=float)
        p.add_argument("--delta", type=float, default=1e-4)
        p.add_argument("--omega-scale", dest="omega_scale", type=float, default=0.5)
        p.add_argument("--eps-zero", dest="eps_zero", type=float, default=1e-3)
        p.add_argument("--N", type=int, help="electron count (nnbf)")
        p.add_argument("--output")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("construct", help="build parameters for a target and verify them")
    common(p)
    p.add_argument("--builder", choices=BUILDERS, default="fnn")
    p.add_argument("--tolerance", type=float)
    p.add_argument("--input", help="target wavefunction JSON")
    p.add_argument("--random", action="store_true", help="random normalized target from --seed")
    p.add_argument("--report", help="report path (default: stdout)")

    p = sub.add_parser("sweep", help="error versus knob over seeds, as CSV")
    common(p)
    p.add_argument("--builder", choices=BUILDERS, default="fnn")
    p.add_argument("--grid", type=_floats, required=True,
                   help="comma-separated knob values (theta, or delta for nps-general)")
    p.add_argument("--seeds", type=_ints, help="comma-separated seeds (default: --seed)")
    p.add_argument("--no-timing", dest="timing", action="store_false",
                   help="write wall_ms as 0 so reruns are byte-identical")

    p = sub.add_parser("demo-necessity", help="top-mode obstruction for exp-of-polynomial activations")
    common(p)
    p.add_argument("--g", type=float, default=1.0)
    return parser


def _config(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=ns.command)
    for key, value in vars(ns).items():
        if hasattr(cfg, key) and value is not None:
            setattr(cfg, key, value)
    if ns.command == "sweep" and not cfg.seeds:
        cfg.seeds = [cfg.seed]
    cfg.validate()
    return cfg


def _load_target(cfg: RunConfig) -> WavefunctionTable:
    if cfg.input:
        with open(cfg.input) as fh:
            text = fh.read()
        try:
            psi = WavefunctionTable.loads(text)
        except (ValueError, KeyError, TypeError) as exc:
            raise InputError(f"{cfg.input}: {exc}") from None
        if cfg.K is not None and cfg.K != psi.K:
            raise UsageError(f"--K {cfg.K} disagrees with the input table (K={psi.K})")
        return psi
    if cfg.K is None:
        raise UsageError("--K is required with a random target")
    return random_target(cfg.K, cfg.seed)


def _write(path: Optional[str], text: str):
    if path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _run_builder(cfg: RunConfig, psi: WavefunctionTable, builder: str, theta=None, delta=None):
    act = acts.get_activation(cfg.activation or DEFAULT_ACTIVATION[builder])
    N = cfg.N
    if builder == "nnbf":
        if N is None:
            N = psi.K // 2 or 1
        psi = sector_projection(psi, N)
    return construct(builder, psi, act, theta=cfg.theta if theta is None else theta,
                     delta=cfg.delta if delta is None else delta,
                     omega_scale=cfg.omega_scale, eps_zero=cfg.eps_zero, N=N)


def cmd_construct(cfg: RunConfig) -> int:
    psi = _load_target(cfg)
    params, report = _run_builder(cfg, psi, cfg.builder)
    tol = cfg.tolerance if cfg.tolerance is not None else DEFAULT_TOLERANCE[cfg.builder]
    check = check_construction(cfg.builder, psi, params, tol)
    report.tolerance = tol
    report.max_abs, report.l2, report.overlap = check.summary.max_abs, check.summary.l2, check.summary.overlap
    report.seed = None if cfg.input else cfg.seed
    if cfg.output:
        _write(cfg.output, dumps_params(params))
    _write(cfg.report, report.to_csv() if cfg.format == "csv" else report.dumps())
    return EXIT_PASS if check.passed else EXIT_FAIL


def _sweep_case(cfg: RunConfig, seed: int, knob: float) -> dict:
    K = cfg.K
    psi = random_target(K, seed)
    start = time.perf_counter()
    if cfg.builder == "nps-general":
        params, _ = _run_builder(cfg, psi, cfg.builder, delta=knob)
    else:
        params, _ = _run_builder(cfg, psi, cfg.builder, theta=knob)
    check = check_construction(cfg.builder, psi, params, math.inf)
    wall = (time.perf_counter() - start) * 1e3 if cfg.timing else 0.0
    return sweep_row(seed, K, cfg.builder, knob, check.summary, wall)


def cmd_sweep(cfg: RunConfig) -> int:
    if not cfg.grid:
        raise UsageError("empty knob grid")
    if cfg.K is None:
        raise UsageError("--K is required")
    jobs = [(s, k) for s in cfg.seeds for k in cfg.grid]
    workers = max(1, int(os.environ.get(THREADS_ENV, "1")))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(lambda job: _sweep_case(cfg, *job), jobs))
    knob = "delta" if cfg.builder == "nps-general" else "theta"
    header = [f"generated {_dt.datetime.now(_dt.timezone.utc).isoformat()}",
              f"builder={cfg.builder} K={cfg.K} knob={knob}"]
    _write(cfg.output, sweep_csv(rows, header))
    return EXIT_PASS


def demo_necessity(K: int, g: float = 1.0, delta: float = 1e-4, activation: str = "cos") -> dict:
    """Target ``exp(g z_1...z_K)`` against a forbidden and an admissible activation."""
    from .boolean_fourier import subset_mask
    from .constructors import build_nps_general, necessity_residual
    from .fockspace import SpinConvention, spin_matrix

    z = spin_matrix(K, SpinConvention.OCCUPIED_DOWN)
    amps = np.exp(g * np.prod(z, axis=1))
    psi = WavefunctionTable(K, amps / np.linalg.norm(amps))
    forbidden = acts.exp_poly_standard(K - 1)
    top = necessity_residual(forbidden, psi, K)

    params, report = build_nps_general(psi, forbidden, delta=delta, strict=False)
    _, positive = general_parts(params, report)
    residual = fourier_residual(positive, WavefunctionTable(K, np.asarray(psi) / math.exp(report.log_norm)))
    best_effort = compare(tabulate(params), psi)

    good = acts.get_activation(activation)
    params_ok, _ = build_nps_general(psi, good, delta=delta)
    ok = compare(tabulate(params_ok), psi)
    return {
        "K": K, "g": g, "delta": delta,
        "forbidden_activation": forbidden.name,
        "top_residual": top,
        "best_effort_top_residual": abs(float(residual.coeffs[subset_mask(range(K), K)])),
        "best_effort_max_abs": best_effort.max_abs,
        "admissible_activation": good.name,
        "admissible_max_abs": ok.max_abs,
        "admissible_neurons": params_ok.n_neurons,
    }


def cmd_demo_necessity(cfg: RunConfig) -> int:
    result = demo_necessity(cfg.K or 3, cfg.g, cfg.delta, cfg.activation or "cos")
    if cfg.format == "csv":
        text = ",".join(result) + "\n" + ",".join(str(v) for v in result.values()) + "\n"
    else:
        text = json.dumps(result, indent=2)
    _write(cfg.output, text)
    return EXIT_PASS


COMMANDS = {"construct": cmd_construct, "sweep": cmd_sweep, "demo-necessity": cmd_demo_necessity}


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = _config(ns)
        return COMMANDS[ns.command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ContractError, RangeError, DegeneracyError, DomainError) as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except (OSError, InputError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, OverflowError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
