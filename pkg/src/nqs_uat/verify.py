"""Independent error measurement and brute-force oracles.

Nothing here imports the builders: every number is recomputed from a fresh
tabulation of the ansatz parameters.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.linalg import hadamard

from .ansatz import NNBFParams, NPSParams, tabulate
from .boolean_fourier import FourierTable, wht_forward
from .errors import DomainError
from .fockspace import WavefunctionTable, config_matrix

SWEEP_FIELDS = ("seed", "K", "builder", "knob", "max_abs", "l2", "overlap", "wall_ms")


@dataclass(frozen=True)
class ErrorSummary:
    max_abs: float
    l2: float
    overlap: float
    worst_index: int


def compare(a: WavefunctionTable, b: WavefunctionTable) -> ErrorSummary:
    if a.K != b.K:
        raise ValueError(f"K mismatch: {a.K} vs {b.K}")
    x, y = np.asarray(a), np.asarray(b)
    diff = np.abs(x - y)
    worst = int(np.argmax(diff))
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0 or ny == 0:
        overlap = 1.0 if nx == ny else 0.0
    else:
        overlap = float(np.clip(np.dot(x, y) / (nx * ny), -1.0, 1.0))
    return ErrorSummary(float(diff[worst]), float(np.linalg.norm(x - y)), overlap, worst)


@dataclass(frozen=True)
class CheckResult:
    passed: bool
    summary: ErrorSummary
    builder: str
    tolerance: float


def sector_projection(psi: WavefunctionTable, N: int) -> WavefunctionTable:
    counts = config_matrix(psi.K).sum(axis=1)
    return WavefunctionTable(psi.K, np.where(counts == N, np.asarray(psi), 0.0))


def check_construction(builder: str, psi: WavefunctionTable, params, tolerance: float) -> CheckResult:
    """Re-tabulate ``params`` and pass iff the max-abs error is within tolerance.

    Fixed-particle-number ansatze are compared on their own sector only.
    """
    target = sector_projection(psi, params.N) if isinstance(params, NNBFParams) else psi
    summary = compare(tabulate(params, psi.K), target)
    return CheckResult(summary.max_abs <= tolerance, summary, builder, tolerance)


def fourier_residual(params: NPSParams, psi: WavefunctionTable) -> FourierTable:
    """Multilinear coefficients of ``ln psi - ln Theta`` for a positive product."""
    amps = np.asarray(psi)
    if np.any(amps <= 0):
        raise DomainError("fourier_residual needs a strictly positive target")
    configs = config_matrix(psi.K).astype(np.float64)
    log_theta = np.full(configs.shape[0], params.log_scale)
    if params.n_neurons:
        phi = np.asarray(params.activation(params.b[None, :] + configs @ params.W.T))
        if not np.all(phi > 0):
            raise DomainError("a neuron factor is non-positive on some configuration")
        log_theta = log_theta + np.log(phi) @ params.multiplicities.astype(np.float64)
    return wht_forward(np.log(amps) - log_theta)


def hadamard_matrix(K: int) -> np.ndarray:
    """``H[x, j] = (-1)^{|x & j|}`` (Sylvester ordering matches the bitmask labels)."""
    return hadamard(1 << K).astype(np.float64)


def naive_wht(values) -> np.ndarray:
    """O(4^K) direct-sum multilinear coefficients (test oracle)."""
    v = np.asarray(values, dtype=np.float64)
    K = v.shape[0].bit_length() - 1
    return hadamard_matrix(K) @ v / v.shape[0]


def random_target(K: int, seed: int) -> WavefunctionTable:
    """Standard-normal amplitudes from ``seed``, normalized."""
    a = np.random.default_rng(seed).standard_normal(1 << K)
    return WavefunctionTable(K, a / np.linalg.norm(a))


def sweep_row(seed: int, K: int, builder: str, knob: float, summary: ErrorSummary,
              wall_ms: float) -> dict:
    return {"seed": seed, "K": K, "builder": builder, "knob": knob,
            "max_abs": summary.max_abs, "l2": summary.l2, "overlap": summary.overlap,
            "wall_ms": wall_ms}


def sweep_csv(rows: Iterable[dict], header_comments: Iterable[str] = ()) -> str:
    """CSV text; rows sorted by (seed, knob) so ordering never depends on scheduling."""
    buf = io.StringIO()
    for line in header_comments:
        buf.write(f"# {line}\n")
    writer = csv.DictWriter(buf, fieldnames=SWEEP_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in sorted(rows, key=lambda r: (r["seed"], r["knob"])):
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()
