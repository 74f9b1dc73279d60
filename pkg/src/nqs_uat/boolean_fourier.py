"""Multilinear (Walsh-Hadamard) analysis of pseudo-Boolean functions.

A table ``Phi`` over configurations is read as a function of spins
``z_k = 1 - 2 n_k`` and expanded as

    Phi(z) = sum_x  coeff[x] * prod_k z_k^{x_k},

with ``coeff[x] = 2^-K sum_z z^x Phi(z)``.  Coefficient tables are indexed by
the bit pattern ``x`` exactly like configurations (orbital 0 in the most
significant bit).
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .activations import Activation
from .errors import DomainError, UnsupportedActivationError
from .fockspace import SpinConvention, WavefunctionTable, check_orbitals

TableLike = Union[WavefunctionTable, np.ndarray, Sequence[float]]


@dataclass(frozen=True, eq=False)
class FourierTable:
    K: int
    coeffs: np.ndarray

    def __post_init__(self):
        K = check_orbitals(self.K)
        c = np.array(self.coeffs, dtype=np.float64).reshape(-1)
        if c.shape[0] != 1 << K:
            raise ValueError(f"expected {1 << K} coefficients for K={K}, got {c.shape[0]}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "coeffs", c)

    def __len__(self):
        return self.coeffs.shape[0]

    def __getitem__(self, x):
        return self.coeffs[x]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coeffs, dtype=dtype)

    def coefficient(self, members: Sequence[int]) -> float:
        return float(self.coeffs[subset_mask(members, self.K)])

    def to_dict(self) -> dict:
        return {"K": self.K, "basis": "fourier", "amplitudes": [float(c) for c in self.coeffs]}

    @classmethod
    def from_dict(cls, data: dict) -> "FourierTable":
        if data.get("basis") != "fourier":
            raise ValueError("missing 'basis': 'fourier' marker")
        return cls(int(data["K"]), np.asarray(data["amplitudes"], dtype=np.float64))

    def dumps(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def loads(cls, text: str) -> "FourierTable":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class SubsetIndex:
    """A subset of orbitals (0-based) with its tier and rank inside the tier."""

    members: tuple[int, ...]
    tier: int
    rank: int

    def mask(self, K: int) -> int:
        return subset_mask(self.members, K)


def subset_mask(members: Sequence[int], K: int) -> int:
    """Index of the bit pattern with ``x_k = 1`` exactly for ``k`` in members."""
    out = 0
    for k in members:
        if not 0 <= k < K:
            raise ValueError(f"orbital {k} out of range for K={K}")
        out |= 1 << (K - 1 - k)
    return out


def mask_members(x: int, K: int) -> tuple[int, ...]:
    return tuple(k for k in range(K) if (x >> (K - 1 - k)) & 1)


def popcounts(K: int) -> np.ndarray:
    idx = np.arange(1 << K)
    return np.array([bin(i).count("1") for i in idx], dtype=np.int64)


def fwht(values: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform, ``out[x] = sum_j (-1)^{|x&j|} v[j]``.

    Butterfly over the bit positions, O(K 2^K).
    """
    a = np.array(values, dtype=np.float64)
    n = a.shape[0]
    K = n.bit_length() - 1
    if n != 1 << K:
        raise ValueError("length must be a power of two")
    h = 1
    while h < n:
        a = a.reshape(-1, 2, h)
        lo = a[:, 0, :] + a[:, 1, :]
        hi = a[:, 0, :] - a[:, 1, :]
        a = np.stack((lo, hi), axis=1)
        h *= 2
    return a.reshape(n)


def _convention_signs(K: int, convention: SpinConvention) -> np.ndarray | None:
    # z_up = -z_down, so z^x picks up (-1)^{|x|}
    if convention is SpinConvention.OCCUPIED_DOWN:
        return None
    return np.where(popcounts(K) % 2 == 0, 1.0, -1.0)


def _as_table(phi: TableLike) -> tuple[int, np.ndarray]:
    if isinstance(phi, WavefunctionTable):
        return phi.K, phi.amplitudes
    arr = np.asarray(phi, dtype=np.float64).reshape(-1)
    K = arr.shape[0].bit_length() - 1
    if arr.shape[0] != 1 << K or K < 1:
        raise ValueError("table length must be 2^K with K >= 1")
    return K, arr


def wht_forward(phi: TableLike, convention: SpinConvention = SpinConvention.OCCUPIED_DOWN) -> FourierTable:
    """Multilinear coefficients of a configuration table."""
    K, values = _as_table(phi)
    coeffs = fwht(values) / (1 << K)
    signs = _convention_signs(K, convention)
    if signs is not None:
        coeffs *= signs
    return FourierTable(K, coeffs)


def wht_inverse(fhat: FourierTable, convention: SpinConvention = SpinConvention.OCCUPIED_DOWN) -> WavefunctionTable:
    """Evaluate the multilinear polynomial at every configuration."""
    coeffs = np.asarray(fhat, dtype=np.float64)
    signs = _convention_signs(fhat.K, convention)
    if signs is not None:
        coeffs = coeffs * signs
    return WavefunctionTable(fhat.K, fwht(coeffs))


def neuron_fourier(
    f: Union[Activation, Callable[[np.ndarray], np.ndarray]],
    b: float,
    omega: Sequence[float],
    support: Sequence[int] | None = None,
    K: int | None = None,
) -> FourierTable:
    """Coefficients of ``f(b + sum_{k in S} omega_k z_k)`` by direct summation.

    ``omega[i]`` multiplies the spin of orbital ``support[i]``.  Without a
    support, ``omega`` covers all ``K = len(omega)`` orbitals.  Only the
    2^|S| sign patterns on the support are evaluated; coefficients of
    patterns reaching outside S are exactly zero.
    """
    omega = np.asarray(omega, dtype=np.float64).reshape(-1)
    if support is None:
        support = tuple(range(omega.shape[0]))
    support = tuple(int(k) for k in support)
    if K is None:
        K = len(support)
    K = check_orbitals(K)
    if len(support) != omega.shape[0]:
        raise ValueError("omega and support lengths differ")
    if len(set(support)) != len(support) or any(not 0 <= k < K for k in support):
        raise ValueError(f"invalid support {support} for K={K}")
    order = sorted(range(len(support)), key=lambda i: support[i])
    support = tuple(support[i] for i in order)
    omega = omega[order]

    t = len(support)
    if t == 0:
        sub = np.array([float(f(np.array([b]))[0])])
    else:
        # sub-configurations on the support, first member in the high bit
        bits = ((np.arange(1 << t)[:, None] >> np.arange(t - 1, -1, -1)) & 1)
        z = 1.0 - 2.0 * bits
        values = np.asarray(f(b + z @ omega), dtype=np.float64)
        if not np.all(np.isfinite(values)):
            raise DomainError(f"non-finite activation value for b={b}, omega={omega.tolist()}")
        sub = fwht(values) / (1 << t)
    if not np.all(np.isfinite(sub)):
        raise DomainError(f"non-finite activation value at b={b}")

    full = np.zeros(1 << K)
    for y in range(1 << t):
        x = 0
        for i, k in enumerate(support):
            if (y >> (t - 1 - i)) & 1:
                x |= 1 << (K - 1 - k)
        full[x] = sub[y]
    return FourierTable(K, full)


def leading_asymptotic(f: Activation, b: float, x: Union[int, Sequence[int]]) -> float:
    """``f^(|x|)(b)``: the prefactor of ``prod omega_k^{x_k}`` in the small-omega limit.

    ``x`` is a 0/1 pattern or directly the order ``|x|``.
    """
    order = int(x) if isinstance(x, (int, np.integer)) else int(sum(x))
    try:
        return f.nth_derivative(order, b)
    except AttributeError as exc:
        raise UnsupportedActivationError(f"{f!r} exposes no derivatives") from exc


def parity_flip(fhat: FourierTable, k: int) -> FourierTable:
    """Coefficients after negating ``omega_k``: multiply by ``(-1)^{x_k}``."""
    if not 0 <= k < fhat.K:
        raise ValueError(f"orbital {k} out of range for K={fhat.K}")
    bit = (np.arange(len(fhat)) >> (fhat.K - 1 - k)) & 1
    return FourierTable(fhat.K, np.where(bit == 1, -fhat.coeffs, fhat.coeffs))


def enumerate_tiers(K: int) -> list[SubsetIndex]:
    """Power set of the orbitals, tier K first down to the empty set."""
    if K < 1:
        raise ValueError("K must be >= 1")
    out = []
    for t in range(K, -1, -1):
        for rank, members in enumerate(itertools.combinations(range(K), t)):
            out.append(SubsetIndex(members, t, rank))
    return out
