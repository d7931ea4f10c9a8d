"""Noise model and the Pauli channel attached to each slot kind.

Paulis are coded as two bits, ``x | z << 1``: 0=I, 1=X, 2=Z, 3=Y.  A
two-qubit Pauli is ``code_a | code_b << 2``.
"""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass

import numpy as np

I, X, Z, Y = 0, 1, 2, 3


class MeasConvention(enum.Enum):
    DEPOLARIZE_THEN_MEASURE = "depolarize"
    CLASSICAL_FLIP = "flip"


@dataclass(frozen=True)
class NoiseModel:
    """Gate depolarizing ``p`` plus the three shuttling channels.

    ``p_sh`` is the dephasing probability per qubit per code cycle,
    ``p_leak`` the leakage probability per qubit per cycle and ``p_rash``
    the X/Y probability per full trip round a loop.
    """

    p: float = 0.0
    p_sh: float = 0.0
    p_leak: float = 0.0
    p_rash: float = 0.0
    meas_convention: MeasConvention = MeasConvention.DEPOLARIZE_THEN_MEASURE

    def __post_init__(self):
        for name in ("p", "p_sh", "p_leak", "p_rash"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if isinstance(self.meas_convention, str):
            object.__setattr__(self, "meas_convention", MeasConvention(self.meas_convention))

    def replace(self, **kw) -> "NoiseModel":
        return NoiseModel(**{**asdict(self), **kw})

    def to_json(self) -> dict:
        out = asdict(self)
        out["meas_convention"] = self.meas_convention.value
        return out

    def single(self, kind: str, repeat: int = 1) -> np.ndarray:
        """Probability vector over {I, X, Z, Y} for one slot."""
        v = np.zeros(4)
        p = self.p
        if kind in ("h", "twirl"):
            v[[X, Y, Z]] = p / 30
        elif kind == "init":
            v[Z] = 2 * p / 3
        elif kind == "meas":
            v[Z] = 2 * p / 3 if self.meas_convention is MeasConvention.DEPOLARIZE_THEN_MEASURE else p
        elif kind == "dephase":
            v[Z] = self.p_sh
        elif kind == "rashba":
            v[[X, Y]] = self.p_rash / 8
        v[I] = 1 - v.sum()
        return compose_power(v, repeat)

    def pair(self) -> np.ndarray:
        v = np.full(16, self.p / 15)
        v[0] = 1 - self.p
        return v


def compose(v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Distribution of the product of two independent Pauli draws."""
    out = np.zeros_like(v)
    n = len(v)
    for a in range(n):
        if v[a]:
            for b in range(n):
                out[a ^ b] += v[a] * w[b]
    return out


def compose_power(v: np.ndarray, n: int) -> np.ndarray:
    out = v
    for _ in range(n - 1):
        out = compose(out, v)
    return out


# Full depolarization from leakage: independent X and Z flips, each w.p. 1/2.
LEAK_DEPOLARIZE = np.array([0.25, 0.25, 0.25, 0.25])
