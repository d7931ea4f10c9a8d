"""Bit-packed Pauli-frame execution of a :class:`CircuitSchedule`.

Frames are ``uint64`` arrays of shape ``(n_qubits, words)``; bit ``s`` of
the row is shot (or column) ``s``.  The same executor runs random shots and
the deterministic single-fault columns used to build decoding graphs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import CZ, H, LeakFlag, LeakMeasure, Measure, PairSlot, Reset, Slot
from .noise import LEAK_DEPOLARIZE, NoiseModel

ONE = np.uint64(1)


def words_for(n: int) -> int:
    return (n + 63) // 64


def _bits(cols: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    cols = np.asarray(cols, dtype=np.int64)
    return cols >> 6, ONE << (cols & 63).astype(np.uint64)


def unpack(packed: np.ndarray, n: int) -> np.ndarray:
    """(rows, words) uint64 -> (rows, n) bool, bit s of each row is column s."""
    b = np.unpackbits(np.ascontiguousarray(packed).view(np.uint8), axis=-1, bitorder="little")
    return b[..., :n].astype(bool)


@dataclass
class FrameResult:
    """Packed measurement records and final data frames."""

    records: list
    X: np.ndarray
    Z: np.ndarray
    n: int


class _Frames:
    def __init__(self, n_qubits: int, n: int):
        self.n = n
        self.W = words_for(n)
        self.X = np.zeros((n_qubits, self.W), dtype=np.uint64)
        self.Z = np.zeros((n_qubits, self.W), dtype=np.uint64)

    def clifford(self, op):
        X, Z = self.X, self.Z
        if isinstance(op, CZ):
            Z[op.a] ^= X[op.b]
            Z[op.b] ^= X[op.a]
        elif isinstance(op, H):
            q = op.qubits
            tmp = X[q].copy()
            X[q] = Z[q]
            Z[q] = tmp
        elif isinstance(op, Reset):
            X[op.qubits] = 0
            Z[op.qubits] = 0

    def flip(self, rows: np.ndarray, cols: np.ndarray, codes: np.ndarray):
        """XOR Pauli ``codes`` onto (row, column) sites."""
        w, bit = _bits(cols)
        xs = (codes & 1).astype(bool)
        zs = (codes & 2).astype(bool)
        if xs.any():
            np.bitwise_xor.at(self.X, (rows[xs], w[xs]), bit[xs])
        if zs.any():
            np.bitwise_xor.at(self.Z, (rows[zs], w[zs]), bit[zs])


def _sample_sites(rng: np.random.Generator, n_sites: int, n: int, prob: float):
    total = n_sites * n
    if prob <= 0 or total == 0:
        return None
    count = rng.binomial(total, prob)
    if count == 0:
        return None
    idx = rng.choice(total, size=count, replace=False)
    return idx // n, idx % n


def _draw(rng, dist: np.ndarray, size: int) -> np.ndarray:
    nz = dist.copy()
    nz[0] = 0
    return rng.choice(len(dist), size=size, p=nz / nz.sum())


def run_random(sched, noise: NoiseModel, n: int, rng: np.random.Generator) -> FrameResult:
    """Run ``n`` independent noisy shots."""
    fr = _Frames(sched.layout.n_qubits, n)
    leaking = noise.p_leak > 0
    leaked = np.zeros_like(fr.X) if leaking else None
    records = [None] * len(sched.records)
    tail = np.uint64((1 << (n % 64)) - 1) if n % 64 else None
    cache: dict = {}

    def randbits(shape):
        r = rng.integers(0, np.iinfo(np.uint64).max, size=shape, dtype=np.uint64, endpoint=True)
        if tail is not None:
            r[..., -1] &= tail
        return r

    def depolarize_where(rows, mask):
        # Independent X and Z flips with probability 1/2 on masked shots.
        fr.X[rows] ^= mask & randbits(mask.shape)
        fr.Z[rows] ^= mask & randbits(mask.shape)

    for op in sched.ops:
        if isinstance(op, (CZ, H, Reset)):
            fr.clifford(op)
        elif isinstance(op, Slot):
            key = (op.kind, op.repeat)
            if key not in cache:
                cache[key] = noise.single(op.kind, op.repeat)
            dist = cache[key]
            ptot = 1 - dist[0]
            sites = _sample_sites(rng, len(op.qubits), n, ptot)
            if sites is not None:
                site, shot = sites
                fr.flip(op.qubits[site], shot, _draw(rng, dist, len(site)))
            if leaking and op.kind == "leak_end":
                m = leaked[op.qubits]
                if m.any():
                    depolarize_where(op.qubits, m)
                leaked[op.qubits] = 0
        elif isinstance(op, PairSlot):
            if "pair" not in cache:
                cache["pair"] = noise.pair()
            dist = cache["pair"]
            sites = _sample_sites(rng, len(op.a), n, 1 - dist[0])
            if sites is not None:
                site, shot = sites
                codes = _draw(rng, dist, len(site))
                fr.flip(op.a[site], shot, codes & 3)
                fr.flip(op.b[site], shot, codes >> 2)
            if leaking:
                ma, mb = leaked[op.b], leaked[op.a]
                if ma.any():
                    depolarize_where(op.a, ma)
                if mb.any():
                    depolarize_where(op.b, mb)
        elif isinstance(op, LeakFlag):
            if leaking:
                sites = _sample_sites(rng, len(op.qubits), n, noise.p_leak)
                if sites is not None:
                    site, shot = sites
                    w, bit = _bits(shot)
                    np.bitwise_or.at(leaked, (op.qubits[site], w), bit)
        elif isinstance(op, LeakMeasure):
            if leaking:
                m = leaked[op.qubits]
                if m.any():
                    fr.Z[op.qubits] ^= m & randbits(m.shape)
        elif isinstance(op, Measure):
            records[op.record] = fr.Z[op.qubits].copy()
    return FrameResult(records, fr.X, fr.Z, n)


@dataclass
class FaultColumns:
    """Elementary single-qubit faults, one frame column each.

    ``columns[(position, qubit, pauli)]`` with ``pauli`` 1 (X) or 2 (Z).
    Slots sharing a position (no Clifford operation between them) share
    columns because their faults propagate identically.
    """

    columns: dict
    slot_positions: list  # per op index: position id or None
    result: FrameResult


def run_fault_columns(sched) -> FaultColumns:
    positions = []
    pos = 0
    columns: dict = {}
    inject: dict = {}
    for i, op in enumerate(sched.ops):
        if isinstance(op, (CZ, H, Reset, Measure)):
            pos += 1
            positions.append(None)
            continue
        positions.append(pos)
        if isinstance(op, Slot):
            qs = op.qubits
        elif isinstance(op, PairSlot):
            qs = np.concatenate([op.a, op.b])
        elif isinstance(op, LeakMeasure):
            qs = op.qubits
        else:
            continue
        for q in qs.tolist():
            for pauli in (1, 2):
                key = (pos, q, pauli)
                if key not in columns:
                    columns[key] = len(columns)
                    inject.setdefault(i, []).append((q, pauli, columns[key]))

    n = len(columns)
    fr = _Frames(sched.layout.n_qubits, max(n, 1))
    records = [None] * len(sched.records)
    for i, op in enumerate(sched.ops):
        if isinstance(op, (CZ, H, Reset)):
            fr.clifford(op)
        elif isinstance(op, Measure):
            records[op.record] = fr.Z[op.qubits].copy()
        if i in inject:
            q, pauli, col = (np.array(v) for v in zip(*inject[i]))
            fr.flip(q, col, pauli)
    return FaultColumns(columns, positions, FrameResult(records, fr.X, fr.Z, n))


__all__ = ["run_random", "run_fault_columns", "unpack", "FrameResult", "FaultColumns", "LEAK_DEPOLARIZE"]
