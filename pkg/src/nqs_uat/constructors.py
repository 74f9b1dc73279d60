"""Constructive universal-approximation builders.

Each builder turns a target wavefunction table into ansatz parameters whose
tabulated amplitudes approach the target as a single knob is tightened:

* ``build_fnn_exact`` / ``build_nnbf_exact``: one saturated hidden neuron per
  configuration (knob ``theta``).
* ``build_nps_saturating``: one neuron per configuration for activations in
  (-1, 1) tending to 1 (knob ``theta``).
* ``build_nps_general``: sign factor plus tier-by-tier matching of the
  multilinear coefficients of the log-amplitude (knob ``delta``).

Builders never report achieved errors; ``verify.check_construction`` fills
them in from an independent tabulation.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from . import activations as acts
from .activations import Activation
from .ansatz import FNNParams, NNBFParams, NPSParams, tabulate
from .boolean_fourier import FourierTable, enumerate_tiers, neuron_fourier, parity_flip, wht_forward
from .errors import (
    ContractError,
    DegeneracyError,
    DomainError,
    LogPolynomialError,
    RangeError,
    SignChangeError,
)
from .fockspace import (
    SpinConvention,
    WavefunctionTable,
    config_matrix,
    sign_census,
    spin_matrix,
)

SATURATION_BRACKET = 50.0
ROOT_XTOL = 1e-15  # well inside the required 1e-12; keeps x0 at float precision
# separating vectors are re-checked by full enumeration up to this K
ENUMERATION_CHECK_K = 12
DEFAULT_B_GRID = np.linspace(-2.0, 2.0, 17)


@dataclass
class SubsetRecord:
    members: tuple[int, ...]
    tier: int
    target: float
    N: int
    b: Optional[float]
    omega: Optional[list[float]]
    kappa_hat: Optional[float]
    residual: float
    halvings: int = 0
    matched: bool = True


@dataclass
class ConstructionReport:
    builder: str
    K: int
    activation: str
    knobs: dict
    n_neurons: int
    n_parameters: int
    tolerance: Optional[float] = None
    max_abs: Optional[float] = None
    l2: Optional[float] = None
    overlap: Optional[float] = None
    sign_neurons: int = 0
    log_norm: float = 0.0
    seed: Optional[int] = None
    wall_time: float = 0.0
    subsets: list[SubsetRecord] = field(default_factory=list)

    def tier_residuals(self) -> dict[int, float]:
        """Largest matched-coefficient residual per tier."""
        out: dict[int, float] = {}
        for rec in self.subsets:
            out[rec.tier] = max(out.get(rec.tier, 0.0), abs(rec.residual))
        return out

    def to_dict(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        """One row per matched subset followed by one summary row."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["row", "tier", "members", "target", "N", "b", "omega",
                         "kappa_hat", "residual", "max_abs", "l2", "overlap", "n_neurons"])
        for rec in self.subsets:
            writer.writerow(["subset", rec.tier, " ".join(map(str, rec.members)),
                             repr(rec.target), rec.N,
                             "" if rec.b is None else repr(rec.b),
                             "" if rec.omega is None else " ".join(repr(w) for w in rec.omega),
                             "" if rec.kappa_hat is None else repr(rec.kappa_hat),
                             repr(rec.residual), "", "", "", ""])
        writer.writerow(["summary", "", "", "", "", "", "", "", "",
                         _fmt(self.max_abs), _fmt(self.l2), _fmt(self.overlap), self.n_neurons])
        return buf.getvalue()


def _fmt(v):
    return "" if v is None else repr(v)


@dataclass(frozen=True, eq=False)
class SignFactor:
    """Product of neurons whose sign pattern matches a target's."""

    activation: Activation
    W: np.ndarray
    b: np.ndarray
    indices: tuple[int, ...]

    def params(self) -> NPSParams:
        return NPSParams(self.activation, self.W, self.b)

    def table(self, K: int) -> WavefunctionTable:
        return tabulate(self.params(), K)


def _require_theta(theta: float):
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")


def _one_hot_layer(K: int, theta: float) -> tuple[np.ndarray, np.ndarray]:
    z = spin_matrix(K, SpinConvention.OCCUPIED_UP).astype(np.float64)
    W = 2.0 * theta * z
    b = theta * (-z.sum(axis=1) - K + 1)
    return W, b


def build_fnn_exact(psi: WavefunctionTable, theta: float,
                    activation: Optional[Activation] = None) -> FNNParams:
    """One neuron per configuration; neuron i fires only on configuration i.

    The pre-activation of neuron i is ``theta`` on its own configuration and
    at most ``-theta`` on every other one.
    """
    activation = activation or acts.sigmoid()
    if not activation.saturating_sigmoidal:
        raise ContractError(f"{activation.name} does not tend to 0 at -inf and 1 at +inf")
    _require_theta(theta)
    W, b = _one_hot_layer(psi.K, theta)
    return FNNParams(activation, np.array(psi.amplitudes), W, b)


def build_nnbf_exact(psi: WavefunctionTable, N: int, theta: float,
                     activation: Optional[Activation] = None) -> NNBFParams:
    activation = activation or acts.sigmoid()
    if not activation.saturating_sigmoidal:
        raise ContractError(f"{activation.name} does not tend to 0 at -inf and 1 at +inf")
    _require_theta(theta)
    K = psi.K
    if not 1 <= N <= K:
        raise ValueError(f"electron count N={N} must lie in [1, {K}]")
    configs = config_matrix(K)
    counts = configs.sum(axis=1)
    amps = np.asarray(psi)
    if np.any(amps[counts != N] != 0):
        warnings.warn(f"amplitudes outside the N={N} sector are ignored", stacklevel=2)
    W, b = _one_hot_layer(K, theta)
    c = np.zeros((K, N, 1 << K))
    for i in np.flatnonzero(counts == N):
        occ = np.flatnonzero(configs[i])
        c[occ[0], 0, i] = amps[i]
        for m in range(1, N):
            c[occ[m], m, i] = 1.0
    return NNBFParams(activation, W, b, c, N)


def separating_margins(u: np.ndarray, i: int, K: int) -> np.ndarray:
    """``u . (n_j - n_i)`` for all j != i."""
    n = config_matrix(K).astype(np.float64)
    d = (n - n[i]) @ u
    return np.delete(d, i)


def separating_vector(i: int, K: int) -> np.ndarray:
    """``u`` with ``u . (n_j - n_i) >= 1`` for every other configuration j.

    ``u = 1 - 2 n_i`` makes the margin equal to the Hamming distance.
    """
    if not 0 <= i < 1 << K:
        raise ValueError(f"configuration index {i} out of range for K={K}")
    n_i = config_matrix(K)[i].astype(np.float64)
    u = 1.0 - 2.0 * n_i
    if K <= ENUMERATION_CHECK_K and K > 0 and (1 << K) > 1:
        assert separating_margins(u, i, K).min() >= 1.0
    return u


def _solve_level(activation: Activation, level: float) -> float:
    lo, hi = -SATURATION_BRACKET, SATURATION_BRACKET
    f_lo, f_hi = float(activation(lo)), float(activation(hi))
    if not f_lo < level < f_hi:
        if f_lo < level <= f_hi and level == f_hi:
            return hi
        raise RangeError(f"amplitude {level} outside ({f_lo}, {f_hi}) of {activation.name}")
    return brentq(lambda x: float(activation(x)) - level, lo, hi, xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps)


def build_nps_saturating(psi: WavefunctionTable, theta: float,
                         activation: Optional[Activation] = None,
                         max_amplitude: float = 0.9) -> NPSParams:
    """Neuron i equals ``Psi(n_i)`` on n_i and tends to 1 elsewhere.

    Targets with ``max |Psi| >= 1`` are first scaled down to ``max_amplitude``;
    the scale goes into ``log_scale``.
    """
    activation = activation or acts.tanh()
    if not activation.saturates_to_one:
        raise ContractError(f"{activation.name} is not bounded in (-1, 1) with limit 1 at +inf")
    if not activation.monotone:
        raise ContractError(f"{activation.name} is not monotone; use build_nps_general")
    _require_theta(theta)
    K = psi.K
    amps = np.array(psi.amplitudes)
    log_scale = 0.0
    peak = np.max(np.abs(amps))
    if peak >= 1.0:
        scale = max_amplitude / peak
        amps *= scale
        log_scale = -math.log(scale)
    n = config_matrix(K).astype(np.float64)
    W = np.empty((1 << K, K))
    b = np.empty(1 << K)
    for i in range(1 << K):
        x0 = _solve_level(activation, float(amps[i]))
        w = theta * separating_vector(i, K)
        W[i] = w
        b[i] = x0 - w @ n[i]
    return NPSParams(activation, W, b, log_scale=log_scale)


def regularize_zeros(psi: WavefunctionTable, eps: float) -> WavefunctionTable:
    """Replace zeros by ``eps/sqrt(M0)`` and shrink the rest by ``sqrt(1-eps^2)``."""
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if not psi.is_normalized(1e-10):
        raise ContractError("regularize_zeros expects a normalized table")
    m0, _, _ = sign_census(psi)
    if m0 == 0:
        return psi
    amps = np.asarray(psi)
    out = np.where(amps == 0, eps / math.sqrt(m0), amps * math.sqrt(1.0 - eps * eps))
    return WavefunctionTable(psi.K, out)


def build_sign_factor(psi_tilde: WavefunctionTable, act: Activation,
                      margin_shrink: float = 0.5) -> SignFactor:
    """One neuron per negative amplitude, negative only on its own configuration.

    Neuron i uses the hyperplane ``u . n + c`` with ``u = 2 n_i - 1`` and
    ``c = 1/2 - |n_i|``: it is ``+1/2`` on n_i and ``<= -1/2`` elsewhere.
    The hyperplane is scaled so every argument stays inside the
    sign-consistent window around the activation's sign change.
    """
    if not act.changes_sign:
        raise SignChangeError(f"{act.name} never changes sign")
    if not 0 < margin_shrink < 1:
        raise ValueError("margin_shrink must lie in (0, 1)")
    m0, _, negatives = sign_census(psi_tilde)
    if m0:
        raise ContractError("target has zero amplitudes; regularize first")
    K = psi_tilde.K
    n = config_matrix(K).astype(np.float64)
    window = act.sign_window if math.isfinite(act.sign_window) else 1.0
    x0, orient = act.sign_change, act.sign_orientation
    W = np.empty((len(negatives), K))
    b = np.empty(len(negatives))
    for row, i in enumerate(negatives):
        u = 2.0 * n[i] - 1.0
        c = 0.5 - n[i].sum()
        plane = n @ u + c
        big = max(0.5, float(np.max(np.abs(np.delete(plane, i))))) if (1 << K) > 1 else 0.5
        theta = margin_shrink * window / big
        W[row] = orient * theta * u
        b[row] = orient * theta * c + x0
    return SignFactor(act, W, b, negatives)


@dataclass
class _Neuron:
    b: float
    omega: np.ndarray
    coeffs: np.ndarray
    top: float
    halvings: int


def _bias_grid(act: Activation, grid) -> np.ndarray:
    lo, hi = act.positive_domain
    g = np.asarray(DEFAULT_B_GRID if grid is None else grid, dtype=np.float64)
    return g[(g > lo) & (g < hi)]


def _find_neuron(kappa: Activation, members: tuple[int, ...], K: int, delta: float,
                 omega_scale: float, grid: np.ndarray, max_halvings: int) -> Optional[_Neuron]:
    """A neuron on ``members`` whose top coefficient is nonzero with magnitude <= delta."""
    t = len(members)
    mask = sum(1 << (K - 1 - k) for k in members)
    lo, hi = kappa.positive_domain
    eps = np.finfo(float).eps
    scores = []
    for b in grid:
        try:
            scores.append(abs(kappa.nth_derivative(t, float(b))))
        except Exception:
            scores.append(0.0)
    order = sorted(range(len(grid)), key=lambda j: -scores[j])
    for j in order:
        b = float(grid[j])
        mag = omega_scale
        checked = False
        for h in range(max_halvings + 1):
            if h:
                mag *= 0.5
            reach = mag * t
            if not (lo < b - reach and b + reach < hi):
                continue
            omega = np.full(t, mag)
            try:
                fhat = neuron_fourier(kappa, b, omega, members, K)
            except DomainError:
                continue
            top = float(fhat.coeffs[mask])
            if not checked:
                # distinguish a genuinely small coefficient from rounding noise
                scale = float(np.max(np.abs(kappa(b + np.array([-reach, 0.0, reach])))))
                if abs(top) <= 1e3 * eps * max(scale, 1.0):
                    break
                checked = True
            if abs(top) <= delta:
                return _Neuron(b, omega, np.array(fhat.coeffs), top, h)
    return None


def check_general_activation(act: Activation, K: int):
    """Both conditions under which products of ``act`` are universal on K orbitals."""
    if not act.changes_sign:
        raise SignChangeError(f"{act.name} cannot produce both signs")
    if act.log_degree is not None and act.log_degree < K:
        raise LogPolynomialError(
            f"ln({act.name}) is a polynomial of degree {act.log_degree} < K={K}")


def build_nps_general(psi: WavefunctionTable, act: Optional[Activation] = None,
                      delta: float = 1e-4, omega_scale: float = 0.5,
                      eps_zero: float = 1e-3, margin_shrink: float = 0.5,
                      b_grid: Optional[Sequence[float]] = None, max_halvings: int = 60,
                      strict: bool = True,
                      skip: Sequence[tuple[int, ...]] = ()) -> tuple[NPSParams, ConstructionReport]:
    """Product-state approximation for a general activation.

    Pipeline: normalize, regularize zeros, factor out the sign pattern, then
    match every non-constant multilinear coefficient of ``ln(Psi_+)`` from
    the highest tier down, one neuron (with integer multiplicity) per
    subset, and absorb the leftover constant into ``log_scale``.

    The returned parameters list the sign neurons first
    (``report.sign_neurons`` of them) followed by the positive neurons.

    ``strict=False`` skips the activation checks and leaves subsets without a
    usable neuron unmatched instead of raising; ``skip`` names subsets that
    are deliberately left unmatched.
    """
    act = act or acts.cos()
    if not delta > 0:
        raise ValueError("delta must be positive")
    if not omega_scale > 0:
        raise ValueError("omega_scale must be positive")
    start = time.perf_counter()
    K = psi.K
    if strict:
        check_general_activation(act, K)
    nrm = psi.norm()
    if nrm == 0:
        raise ValueError("target is identically zero")
    psi_n = WavefunctionTable(K, np.asarray(psi) / nrm)
    psi_t = regularize_zeros(psi_n, eps_zero)

    _, n_neg, _ = sign_census(psi_t)
    if n_neg:
        sign = build_sign_factor(psi_t, act, margin_shrink)
    else:
        sign = SignFactor(act, np.zeros((0, K)), np.zeros(0), ())
    s = np.asarray(sign.table(K))
    positive = np.asarray(psi_t) / s
    if not np.all(positive > 0):
        raise DomainError("sign factor failed to reproduce the target's signs")

    ghat = np.array(wht_forward(np.log(positive)).coeffs)
    kappa = act.log
    grid = _bias_grid(act, b_grid)
    skip = {tuple(sorted(m)) for m in skip}

    rows_W, rows_b, mults = [], [], []
    records = []
    for sub in enumerate_tiers(K):
        if sub.tier == 0:
            continue
        mask = sub.mask(K)
        target = float(ghat[mask])
        if target == 0.0 or sub.members in skip:
            records.append(SubsetRecord(sub.members, sub.tier, target, 0, None, None, None,
                                        target, matched=sub.members not in skip))
            continue
        neuron = _find_neuron(kappa, sub.members, K, delta, omega_scale, grid, max_halvings)
        if neuron is None:
            if strict:
                raise DegeneracyError(
                    f"no neuron with a nonzero coefficient on subset {sub.members} for {act.name}")
            records.append(SubsetRecord(sub.members, sub.tier, target, 0, None, None, None,
                                        target, matched=False))
            continue
        coeffs, omega = neuron.coeffs, neuron.omega
        if np.sign(neuron.top) != np.sign(target):
            coeffs = np.asarray(parity_flip(FourierTable(K, coeffs), sub.members[0]))
            omega = omega.copy()
            omega[0] = -omega[0]
        kh = float(coeffs[mask])
        ratio = target / kh
        if not abs(ratio) < 2.0**62:
            raise OverflowError(f"multiplicity {ratio:.3g} overflows int64; raise delta")
        N = int(round(ratio))
        if N:
            ghat -= N * coeffs
            w_full = np.zeros(K)
            w_full[list(sub.members)] = omega
            # b + omega.z with z = 1 - 2n
            rows_W.append(-2.0 * w_full)
            rows_b.append(neuron.b + omega.sum())
            mults.append(N)
        records.append(SubsetRecord(sub.members, sub.tier, target, N, neuron.b,
                                    omega.tolist(), kh, float(ghat[mask]), neuron.halvings))

    log_scale = float(ghat[0]) + math.log(nrm)
    W = np.vstack([sign.W] + [np.asarray(rows_W).reshape(-1, K)])
    b = np.concatenate([sign.b, np.asarray(rows_b, dtype=np.float64)])
    mult = np.concatenate([np.ones(len(sign.b), dtype=np.int64), np.asarray(mults, dtype=np.int64)])
    params = NPSParams(act, W, b, mult, log_scale)
    report = ConstructionReport(
        builder="nps-general", K=K, activation=act.name,
        knobs={"delta": delta, "omega_scale": omega_scale, "eps_zero": eps_zero,
               "margin_shrink": margin_shrink},
        n_neurons=params.n_neurons, n_parameters=params.n_neurons * (K + 2) + 1,
        sign_neurons=len(sign.b), log_norm=math.log(nrm),
        wall_time=time.perf_counter() - start, subsets=records,
    )
    return params, report


def general_parts(params: NPSParams, report: ConstructionReport) -> tuple[NPSParams, NPSParams]:
    """Split a general construction into (sign factor, positive product incl. scale)."""
    k = report.sign_neurons
    sign = params.select(np.arange(k), log_scale=0.0)
    pos = params.select(np.arange(k, params.n_neurons), log_scale=params.log_scale - report.log_norm)
    return sign, pos


def necessity_residual(act: Activation, psi: WavefunctionTable, K: Optional[int] = None) -> float:
    """Top multilinear coefficient of ``ln psi`` that no product of ``act`` can touch.

    ``act`` must be ``exp`` of a polynomial of degree ``< K``; then every
    ``ln(act(b + w.z))`` is multilinear of degree ``< K`` and so is any sum
    of them, leaving the top coefficient of the target unmatched.
    """
    K = psi.K if K is None else K
    if K != psi.K:
        raise ValueError("K does not match the table")
    if act.log_degree is None or act.log_degree >= K:
        raise ContractError(f"{act.name} is not exp of a polynomial of degree < {K}")
    amps = np.asarray(psi)
    if np.any(amps <= 0):
        raise DomainError("necessity residual needs a strictly positive table")
    top = float(wht_forward(np.log(amps)).coeffs[-1])
    # spot check: random neurons of this activation have no top-mode weight
    rng = np.random.default_rng(0)
    kappa = act.log
    for _ in range(4):
        b = rng.uniform(-1, 1)
        w = rng.uniform(-1, 1, K)
        fh = neuron_fourier(kappa, b, w, K=K)
        floor = 1e-9 * max(1.0, float(np.max(np.abs(fh.coeffs))))
        assert abs(fh.coeffs[-1]) <= floor, "log-polynomial neuron reached the top mode"
    return abs(top)


BUILDERS = ("fnn", "nnbf", "nps-sat", "nps-general")
DEFAULT_ACTIVATION = {"fnn": "sigmoid", "nnbf": "sigmoid", "nps-sat": "tanh", "nps-general": "cos"}


def construct(builder: str, psi: WavefunctionTable, activation: Optional[Activation] = None,
              *, theta: Optional[float] = None, delta: float = 1e-4, omega_scale: float = 0.5,
              eps_zero: float = 1e-3, N: Optional[int] = None, strict: bool = True):
    """Run one builder by id; returns ``(params, report)`` without errors filled in."""
    if builder not in BUILDERS:
        raise ValueError(f"unknown builder {builder!r}")
    activation = activation or acts.get_activation(DEFAULT_ACTIVATION[builder])
    if builder == "nps-general":
        return build_nps_general(psi, activation, delta=delta, omega_scale=omega_scale,
                                 eps_zero=eps_zero, strict=strict)
    start = time.perf_counter()
    if builder == "fnn":
        theta = 40.0 if theta is None else theta
        params = build_fnn_exact(psi, theta, activation)
        n_neurons, n_par = params.W.shape[0], params.W.size + 2 * params.W.shape[0]
    elif builder == "nnbf":
        theta = 40.0 if theta is None else theta
        if N is None:
            raise ValueError("the nnbf builder needs an electron count N")
        params = build_nnbf_exact(psi, N, theta, activation)
        n_neurons, n_par = params.W.shape[0], params.W.size + params.b.size + params.c.size
    else:
        theta = 60.0 if theta is None else theta
        params = build_nps_saturating(psi, theta, activation)
        n_neurons, n_par = params.n_neurons, params.W.size + params.b.size
    knobs = {"theta": theta} if builder != "nnbf" else {"theta": theta, "N": N}
    report = ConstructionReport(builder=builder, K=psi.K, activation=activation.name, knobs=knobs,
                                n_neurons=n_neurons, n_parameters=n_par,
                                wall_time=time.perf_counter() - start)
    return params, report
