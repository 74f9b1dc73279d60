"""Occupation-number basis of K spin-orbitals.

Configurations are integer bitmasks with orbital 0 (``n_1``) in the most
significant bit, so the lexicographic position of a configuration equals its
integer value.  Orbitals are addressed 0-based throughout the package.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError

MAX_ORBITALS = 20


class SpinConvention(enum.Enum):
    """Affine maps from occupations ``n`` to spins ``z``.

    ``OCCUPIED_UP``:   z = 2n - 1   (occupied -> +1)
    ``OCCUPIED_DOWN``: z = 1 - 2n   (occupied -> -1), used for all Fourier work
    """

    OCCUPIED_UP = "occupied-up"
    OCCUPIED_DOWN = "occupied-down"


def check_orbitals(K: int) -> int:
    if not isinstance(K, (int, np.integer)) or not 1 <= K <= MAX_ORBITALS:
        raise CapacityError(f"K must be an integer in [1, {MAX_ORBITALS}], got {K!r}")
    return int(K)


@dataclass(frozen=True)
class OccupationVector:
    bits: tuple[int, ...]

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"occupations must be 0 or 1, got {self.bits}")

    @classmethod
    def from_index(cls, index: int, K: int) -> "OccupationVector":
        K = check_orbitals(K)
        if not 0 <= index < 1 << K:
            raise ValueError(f"index {index} out of range for K={K}")
        return cls(tuple((index >> (K - 1 - k)) & 1 for k in range(K)))

    @property
    def K(self) -> int:
        return len(self.bits)

    @property
    def index(self) -> int:
        out = 0
        for b in self.bits:
            out = (out << 1) | b
        return out

    @property
    def n_electrons(self) -> int:
        return sum(self.bits)

    def occupied(self) -> tuple[int, ...]:
        return tuple(k for k, b in enumerate(self.bits) if b)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.bits, dtype=dtype if dtype is not None else np.int64)

    def __len__(self):
        return len(self.bits)


@dataclass(frozen=True)
class SpinVector:
    values: tuple[int, ...]
    convention: SpinConvention

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype if dtype is not None else np.int64)

    def __len__(self):
        return len(self.values)


@lru_cache(maxsize=None)
def _config_matrix(K: int) -> np.ndarray:
    idx = np.arange(1 << K, dtype=np.int64)
    shifts = np.arange(K - 1, -1, -1, dtype=np.int64)
    out = ((idx[:, None] >> shifts[None, :]) & 1).astype(np.int8)
    out.setflags(write=False)
    return out


def config_matrix(K: int) -> np.ndarray:
    """All 2^K occupation vectors as a read-only ``(2^K, K)`` int8 array."""
    return _config_matrix(check_orbitals(K))


def enumerate_configs(K: int) -> list[OccupationVector]:
    """All configurations in lexicographic order; position equals index."""
    return [OccupationVector(tuple(int(b) for b in row)) for row in config_matrix(K)]


def as_bits(n) -> np.ndarray:
    """Coerce an OccupationVector or 0/1 sequence into an int array."""
    arr = np.asarray(n, dtype=np.int64)
    if arr.ndim != 1 or np.any((arr != 0) & (arr != 1)):
        raise ValueError("expected a 1-d sequence of 0/1 occupations")
    return arr


def to_spin(n, convention: SpinConvention) -> SpinVector:
    bits = as_bits(n)
    if convention is SpinConvention.OCCUPIED_UP:
        z = 2 * bits - 1
    else:
        z = 1 - 2 * bits
    return SpinVector(tuple(int(v) for v in z), convention)


def from_spin(z: SpinVector) -> OccupationVector:
    v = np.asarray(z, dtype=np.int64)
    if z.convention is SpinConvention.OCCUPIED_UP:
        bits = (v + 1) // 2
    else:
        bits = (1 - v) // 2
    return OccupationVector(tuple(int(b) for b in bits))


def spin_matrix(K: int, convention: SpinConvention) -> np.ndarray:
    """All spin vectors, row i belonging to configuration i."""
    n = config_matrix(K).astype(np.int64)
    return 2 * n - 1 if convention is SpinConvention.OCCUPIED_UP else 1 - 2 * n


def dot_statistics(z_i: SpinVector, z: SpinVector) -> int:
    if len(z_i) != len(z):
        raise ValueError(f"length mismatch: {len(z_i)} vs {len(z)}")
    if z_i.convention is not z.convention:
        raise ValueError("spin vectors use different conventions")
    return int(np.dot(np.asarray(z_i), np.asarray(z)))


@dataclass(frozen=True, eq=False)
class WavefunctionTable:
    """Dense real amplitudes over all 2^K configurations (lexicographic)."""

    K: int
    amplitudes: np.ndarray

    def __post_init__(self):
        K = check_orbitals(self.K)
        amps = np.array(self.amplitudes, dtype=np.float64).reshape(-1)
        if amps.shape[0] != 1 << K:
            raise ValueError(f"expected {1 << K} amplitudes for K={K}, got {amps.shape[0]}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        amps.setflags(write=False)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "amplitudes", amps)

    def __len__(self):
        return self.amplitudes.shape[0]

    def __getitem__(self, i):
        return self.amplitudes[i]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, tol: float = 1e-12) -> bool:
        return abs(float(np.dot(self.amplitudes, self.amplitudes)) - 1.0) <= tol

    def normalized(self) -> "WavefunctionTable":
        nrm = self.norm()
        if nrm == 0:
            raise ValueError("cannot normalize the zero table")
        return WavefunctionTable(self.K, self.amplitudes / nrm)

    def to_dict(self) -> dict:
        return {"K": self.K, "amplitudes": [float(a) for a in self.amplitudes]}

    @classmethod
    def from_dict(cls, data: dict) -> "WavefunctionTable":
        if data.get("basis", "configuration") != "configuration":
            raise ValueError(f"not a configuration-basis table: basis={data['basis']!r}")
        return cls(int(data["K"]), np.asarray(data["amplitudes"], dtype=np.float64))

    def dumps(self) -> str:
        # json emits repr(float), the shortest round-trip decimal
        return json.dumps(self.to_dict())

    @classmethod
    def loads(cls, text: str) -> "WavefunctionTable":
        return cls.from_dict(json.loads(text))


def sign_census(psi: WavefunctionTable) -> tuple[int, int, tuple[int, ...]]:
    """Return ``(zero count, negative count, sorted indices of negatives)``."""
    amps = np.asarray(psi)
    negative = np.flatnonzero(amps < 0)
    return int(np.count_nonzero(amps == 0)), int(negative.size), tuple(int(i) for i in negative)


def table_from_function(K: int, func, configs: Iterable[Sequence[int]] | None = None) -> WavefunctionTable:
    """Tabulate ``func(bits)`` over every configuration."""
    rows = config_matrix(K) if configs is None else configs
    return WavefunctionTable(K, np.array([func(np.asarray(r)) for r in rows], dtype=np.float64))
