"""Exact evaluation of NPS, RBM, FNN, NNBF and CPS wavefunctions.

Every evaluator works on occupation vectors ``n`` (0/1, orbital 0 first).
``tabulate`` produces the full table in lexicographic order and is
vectorized over configurations.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import singledispatch
from typing import Union

import numpy as np

from .activations import Activation, get_activation
from .errors import DomainError, SectorError
from .fockspace import OccupationVector, WavefunctionTable, as_bits, config_matrix, check_orbitals


def _matrix(a, rows=None, cols=None, name="W") -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    if a.ndim == 1 and a.size == 0:
        a = a.reshape(0, cols or 0)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-d, got shape {a.shape}")
    if rows is not None and a.shape[0] != rows:
        raise ValueError(f"{name} has {a.shape[0]} rows, expected {rows}")
    if cols is not None and a.shape[1] != cols:
        raise ValueError(f"{name} has {a.shape[1]} columns, expected {cols}")
    return a


def _vector(a, size=None, name="b") -> np.ndarray:
    a = np.array(a, dtype=np.float64).reshape(-1)
    if size is not None and a.shape[0] != size:
        raise ValueError(f"{name} has length {a.shape[0]}, expected {size}")
    return a


@dataclass(frozen=True, eq=False)
class NPSParams:
    """Neuron product state ``exp(log_scale) * prod_a phi(b_a + W_a . n)^{N_a}``."""

    activation: Activation
    W: np.ndarray
    b: np.ndarray
    multiplicities: np.ndarray = None
    log_scale: float = 0.0

    def __post_init__(self):
        W = _matrix(self.W)
        b = _vector(self.b, W.shape[0])
        mult = (np.ones(W.shape[0], dtype=np.int64) if self.multiplicities is None
                else np.array(self.multiplicities, dtype=np.int64).reshape(-1))
        if mult.shape[0] != W.shape[0]:
            raise ValueError("one multiplicity per neuron required")
        if np.any(mult < 1):
            raise ValueError("multiplicities must be >= 1")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "multiplicities", mult)
        object.__setattr__(self, "log_scale", float(self.log_scale))

    @property
    def K(self) -> int:
        return self.W.shape[1]

    @property
    def n_neurons(self) -> int:
        return self.W.shape[0]

    def select(self, rows, log_scale: float | None = None) -> "NPSParams":
        """Sub-product over the given neuron rows."""
        rows = np.asarray(rows, dtype=np.int64).reshape(-1)
        return NPSParams(self.activation, self.W[rows].reshape(-1, self.K), self.b[rows],
                         self.multiplicities[rows],
                         self.log_scale if log_scale is None else log_scale)


@dataclass(frozen=True, eq=False)
class FNNParams:
    """One hidden layer: ``c . sigma(b + W n)``."""

    activation: Activation
    c: np.ndarray
    W: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        W = _matrix(self.W)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", _vector(self.b, W.shape[0]))
        object.__setattr__(self, "c", _vector(self.c, W.shape[0], "c"))

    @property
    def K(self) -> int:
        return self.W.shape[1]


@dataclass(frozen=True, eq=False)
class NNBFParams:
    """Backflow determinant with orbitals ``phi_pm(n) = c[p, m] . sigma(b + W n)``.

    ``c`` has shape ``(K, N, N_h)``.
    """

    activation: Activation
    W: np.ndarray
    b: np.ndarray
    c: np.ndarray
    N: int

    def __post_init__(self):
        W = _matrix(self.W)
        K, Nh = W.shape[1], W.shape[0]
        N = int(self.N)
        if not 1 <= N <= K:
            raise ValueError(f"electron count N={N} must lie in [1, {K}]")
        c = np.array(self.c, dtype=np.float64)
        if c.shape != (K, N, Nh):
            raise ValueError(f"c must have shape {(K, N, Nh)}, got {c.shape}")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", _vector(self.b, Nh))
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "N", N)

    @property
    def K(self) -> int:
        return self.W.shape[1]


@dataclass(frozen=True, eq=False)
class CPSParams:
    """Pair correlators; ``correlators[i, j]`` (i < j) is the 2x2 table C^{n_i n_j}."""

    correlators: np.ndarray

    def __post_init__(self):
        C = np.array(self.correlators, dtype=np.float64)
        if C.ndim != 4 or C.shape[0] != C.shape[1] or C.shape[2:] != (2, 2):
            raise ValueError(f"correlators must have shape (K, K, 2, 2), got {C.shape}")
        iu = np.triu_indices(C.shape[0], 1)
        if not np.all(np.isfinite(C[iu])):
            raise ValueError("correlator entries must be finite")
        object.__setattr__(self, "correlators", C)

    @property
    def K(self) -> int:
        return self.correlators.shape[0]


@dataclass(frozen=True, eq=False)
class RBMParams:
    """``exp(a . n) prod_a (1 + exp(b_a + W_a . n))``."""

    a: np.ndarray
    b: np.ndarray
    W: np.ndarray

    def __post_init__(self):
        a = _vector(self.a, name="a")
        W = _matrix(self.W, cols=a.shape[0])
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", _vector(self.b, W.shape[0]))

    @property
    def K(self) -> int:
        return self.a.shape[0]


AnsatzParams = Union[NPSParams, FNNParams, NNBFParams, CPSParams, RBMParams]


def _configs(n, K: int) -> np.ndarray:
    bits = as_bits(n)
    if bits.shape[0] != K:
        raise ValueError(f"configuration has {bits.shape[0]} orbitals, ansatz has {K}")
    return bits[None, :].astype(np.float64)


# --- NPS ---------------------------------------------------------------------

def nps_log_batch(params: NPSParams, configs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sign and log-magnitude for each row of ``configs``."""
    configs = np.asarray(configs, dtype=np.float64)
    m = configs.shape[0]
    if params.n_neurons == 0:
        return np.ones(m), np.full(m, params.log_scale)
    args = params.b[None, :] + configs @ params.W.T
    phi = np.asarray(params.activation(args), dtype=np.float64)
    if np.any(np.isnan(phi)):
        raise DomainError(f"activation {params.activation.name} returned NaN")
    mult = params.multiplicities[None, :]
    zero = np.any(phi == 0, axis=1)
    with np.errstate(divide="ignore"):
        logabs = np.log(np.abs(phi))
    odd_negative = (phi < 0) & (mult % 2 == 1)
    sign = np.where(np.count_nonzero(odd_negative, axis=1) % 2 == 0, 1.0, -1.0)
    logmag = np.where(zero, -np.inf, 0.0)
    finite_rows = ~zero
    logmag[finite_rows] = (logabs[finite_rows] * mult).sum(axis=1) + params.log_scale
    sign[zero] = 0.0
    return sign, logmag


def eval_nps_log(params: NPSParams, n) -> tuple[float, float]:
    """``(sign, ln|Psi|)`` with sign in {-1, 0, +1}."""
    sign, logmag = nps_log_batch(params, _configs(n, params.K))
    return float(sign[0]), float(logmag[0])


def eval_nps(params: NPSParams, n) -> float:
    sign, logmag = eval_nps_log(params, n)
    return 0.0 if sign == 0 else sign * float(np.exp(logmag))


# --- FNN ---------------------------------------------------------------------

def _hidden(activation: Activation, W, b, configs) -> np.ndarray:
    return np.asarray(activation(b[None, :] + configs @ W.T), dtype=np.float64)


def fnn_batch(params: FNNParams, configs) -> np.ndarray:
    return _hidden(params.activation, params.W, params.b, np.asarray(configs, dtype=np.float64)) @ params.c


def eval_fnn(params: FNNParams, n) -> float:
    return float(fnn_batch(params, _configs(n, params.K))[0])


# --- NNBF --------------------------------------------------------------------

def orbital_matrix(params: NNBFParams, n) -> np.ndarray:
    """The N x N matrix ``phi_{p_k m}(n)`` over occupied orbitals p_1 < ... < p_N."""
    bits = as_bits(n)
    occ = np.flatnonzero(bits)
    if occ.shape[0] != params.N:
        raise SectorError(f"configuration has {occ.shape[0]} electrons, ansatz expects {params.N}")
    h = _hidden(params.activation, params.W, params.b, bits[None, :].astype(np.float64))[0]
    return params.c[occ] @ h


def eval_nnbf(params: NNBFParams, n) -> float:
    if as_bits(n).shape[0] != params.K:
        raise ValueError("configuration length does not match the ansatz")
    return float(np.linalg.det(orbital_matrix(params, n)))


# --- CPS / RBM ---------------------------------------------------------------

def cps_batch(params: CPSParams, configs) -> np.ndarray:
    configs = np.asarray(configs, dtype=np.int64)
    out = np.ones(configs.shape[0])
    K = params.K
    for i in range(K):
        for j in range(i + 1, K):
            out *= params.correlators[i, j][configs[:, i], configs[:, j]]
    return out


def eval_cps(params: CPSParams, n) -> float:
    return float(cps_batch(params, _configs(n, params.K))[0])


def rbm_log_batch(params: RBMParams, configs) -> np.ndarray:
    configs = np.asarray(configs, dtype=np.float64)
    theta = params.b[None, :] + configs @ params.W.T
    return configs @ params.a + np.logaddexp(0.0, theta).sum(axis=1)


def eval_rbm(params: RBMParams, n) -> float:
    return float(np.exp(rbm_log_batch(params, _configs(n, params.K))[0]))


# --- tabulation ----------------------------------------------------------------

@singledispatch
def tabulate(params, K: int | None = None) -> WavefunctionTable:
    """Evaluate an ansatz at every configuration, lexicographic order."""
    raise TypeError(f"cannot tabulate {type(params).__name__}")


def _check_K(params, K):
    K = params.K if K is None else check_orbitals(K)
    if K != params.K:
        raise ValueError(f"ansatz acts on {params.K} orbitals, asked for K={K}")
    return K


@tabulate.register
def _(params: NPSParams, K=None):
    K = _check_K(params, K)
    sign, logmag = nps_log_batch(params, config_matrix(K))
    with np.errstate(over="ignore"):
        vals = np.where(sign == 0, 0.0, sign * np.exp(logmag))
    return WavefunctionTable(K, vals)


@tabulate.register
def _(params: FNNParams, K=None):
    K = _check_K(params, K)
    return WavefunctionTable(K, fnn_batch(params, config_matrix(K)))


@tabulate.register
def _(params: NNBFParams, K=None):
    # the ansatz is defined on one particle-number sector; zero elsewhere
    K = _check_K(params, K)
    configs = config_matrix(K)
    out = np.zeros(configs.shape[0])
    for i, row in enumerate(configs):
        if row.sum() == params.N:
            out[i] = eval_nnbf(params, row)
    return WavefunctionTable(K, out)


@tabulate.register
def _(params: CPSParams, K=None):
    K = _check_K(params, K)
    return WavefunctionTable(K, cps_batch(params, config_matrix(K)))


@tabulate.register
def _(params: RBMParams, K=None):
    K = _check_K(params, K)
    return WavefunctionTable(K, np.exp(rbm_log_batch(params, config_matrix(K))))


def evaluate(params, n) -> float:
    """Dispatch to the evaluator matching the parameter type."""
    fn = {NPSParams: eval_nps, FNNParams: eval_fnn, NNBFParams: eval_nnbf,
          CPSParams: eval_cps, RBMParams: eval_rbm}[type(params)]
    return fn(params, n)


# --- parameter files -----------------------------------------------------------

def params_to_dict(params) -> dict:
    if isinstance(params, NPSParams):
        return {"ansatz": "nps", "activation": params.activation.name, "K": params.K,
                "W": params.W.tolist(), "b": params.b.tolist(),
                "multiplicities": params.multiplicities.tolist(), "log_scale": params.log_scale}
    if isinstance(params, FNNParams):
        return {"ansatz": "fnn", "activation": params.activation.name, "K": params.K,
                "c": params.c.tolist(), "W": params.W.tolist(), "b": params.b.tolist()}
    if isinstance(params, NNBFParams):
        return {"ansatz": "nnbf", "activation": params.activation.name, "K": params.K,
                "N": params.N, "W": params.W.tolist(), "b": params.b.tolist(), "c": params.c.tolist()}
    if isinstance(params, CPSParams):
        return {"ansatz": "cps", "K": params.K, "correlators": params.correlators.tolist()}
    if isinstance(params, RBMParams):
        return {"ansatz": "rbm", "K": params.K, "a": params.a.tolist(),
                "b": params.b.tolist(), "W": params.W.tolist()}
    raise TypeError(f"unknown parameter type {type(params).__name__}")


def params_from_dict(data: dict):
    kind = data.get("ansatz")
    K = data.get("K")

    def mat(key):
        return _matrix(data[key], cols=K, name=key) if K is not None else _matrix(data[key], name=key)

    if kind == "nps":
        return NPSParams(get_activation(data["activation"]), mat("W"), data["b"],
                         data.get("multiplicities"), data.get("log_scale", 0.0))
    if kind == "fnn":
        return FNNParams(get_activation(data["activation"]), data["c"], mat("W"), data["b"])
    if kind == "nnbf":
        return NNBFParams(get_activation(data["activation"]), mat("W"), data["b"],
                          data["c"], data["N"])
    if kind == "cps":
        return CPSParams(data["correlators"])
    if kind == "rbm":
        return RBMParams(data["a"], data["b"], mat("W"))
    raise ValueError(f"unknown ansatz discriminator {kind!r}")


def dumps_params(params) -> str:
    return json.dumps(params_to_dict(params))


def loads_params(text: str):
    return params_from_dict(json.loads(text))
