"""Decoding graphs from exhaustive single-fault enumeration.

Every noise slot is expanded into its Pauli outcomes.  The effect of an
outcome is the XOR of the effects of its single-qubit X/Z components, which
:func:`run_fault_columns` computes once per circuit.  Each outcome
contributes, in each sector, an edge between the (at most two) detectors it
flips, or a boundary edge if it flips one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import pymatching

from .circuit import LeakMeasure, PairSlot, Slot, build_circuit
from .detectors import SECTORS, packed_detectors
from .frame import run_fault_columns, unpack
from .noise import NoiseModel

BOUNDARY = -1


class GraphError(RuntimeError):
    pass


@dataclass(frozen=True)
class Mechanism:
    """One Pauli outcome of one slot, with its detector footprint per sector."""

    op_index: int
    qubits: tuple
    code: int
    prob: float
    dets: dict  # sector -> frozenset of detector indices
    obs: dict  # sector -> bool


@dataclass
class DecodingGraph:
    sector: str
    n_detectors: int
    edges: dict = field(default_factory=dict)  # (u, v) -> [prob, mass flipping, mass not]
    conflicts: int = 0
    undetectable: float = 0.0

    def add(self, dets: frozenset, obs: bool, prob: float):
        if prob <= 0:
            return
        if len(dets) > 2:
            raise GraphError(f"fault flips {len(dets)} detectors in sector {self.sector}")
        if not dets:
            if obs:
                self.undetectable += prob
            return
        u, v = sorted(dets) if len(dets) == 2 else (next(iter(dets)), BOUNDARY)
        e = self.edges.setdefault((u, v), [0.0, 0.0, 0.0])
        e[0] = e[0] * (1 - prob) + prob * (1 - e[0])
        e[1 if obs else 2] += prob
        if e[1] > 0 and e[2] > 0 and e[1 if obs else 2] == prob:
            self.conflicts += 1

    def label(self, key) -> bool:
        """Logical label of an edge: the one carrying more probability."""
        e = self.edges[key]
        return e[1] > e[2]

    def weight(self, key) -> float:
        p = self.edges[key][0]
        return math.log((1 - p) / p)

    def to_matching(self) -> pymatching.Matching:
        m = pymatching.Matching()
        for key, (p, _, _) in self.edges.items():
            u, v = key
            ids = {0} if self.label(key) else set()
            w = math.log((1 - p) / p)
            if v == BOUNDARY:
                m.add_boundary_edge(u, fault_ids=ids, weight=w, error_probability=p)
            else:
                m.add_edge(u, v, fault_ids=ids, weight=w, error_probability=p)
        return m


@lru_cache(maxsize=8)
def fault_footprints(d: int, cycles: int):
    """Per elementary column: (detector set per sector, observable per sector)."""
    sched = build_circuit(d, cycles)
    fc = run_fault_columns(sched)
    packed = packed_detectors(sched, fc.result)
    n = fc.result.n
    foot = {}
    for sector in SECTORS:
        dets, obs = packed[sector]
        dense = unpack(dets, n)
        cols, rows = np.nonzero(dense.T)
        split = np.split(rows, np.searchsorted(cols, np.arange(1, n)))
        foot[sector] = ([frozenset(s.tolist()) for s in split], unpack(obs[None, :], n)[0])
    return sched, fc, foot


def _outcomes(noise: NoiseModel, op, cache) -> list:
    """[(qubit tuple per site, code, prob)] for a slot op, including leakage."""
    out = []
    if isinstance(op, Slot):
        key = (op.kind, op.repeat)
        if key not in cache:
            cache[key] = noise.single(op.kind, op.repeat)
        dist = cache[key]
        codes = [(c, dist[c]) for c in (1, 2, 3) if dist[c] > 0]
        if op.kind == "leak_end" and noise.p_leak > 0:
            codes = [(c, noise.p_leak / 4) for c in (1, 2, 3)]
        for q in op.qubits.tolist():
            out += [((q,), c, p) for c, p in codes]
    elif isinstance(op, LeakMeasure):
        if noise.p_leak > 0:
            out += [((q,), 2, noise.p_leak / 2) for q in op.qubits.tolist()]
    elif isinstance(op, PairSlot):
        if noise.p > 0:
            for a, b in zip(op.a.tolist(), op.b.tolist()):
                out += [((a, b), c, noise.p / 15) for c in range(1, 16)]
        if noise.p_leak > 0:
            for a, b in zip(op.a.tolist(), op.b.tolist()):
                for q in (a, b):
                    out += [((q,), c, noise.p_leak / 4) for c in (1, 2, 3)]
    return out


def enumerate_mechanisms(d: int, cycles: int, noise: NoiseModel):
    """Yield every single-fault :class:`Mechanism` with nonzero probability."""
    sched, fc, foot = fault_footprints(d, cycles)
    cache: dict = {}
    for i, op in enumerate(sched.ops):
        pos = fc.slot_positions[i]
        if pos is None:
            continue
        for qubits, code, prob in _outcomes(noise, op, cache):
            cols = []
            for j, q in enumerate(qubits):
                c = (code >> (2 * j)) & 3
                if c & 1:
                    cols.append(fc.columns[(pos, q, 1)])
                if c & 2:
                    cols.append(fc.columns[(pos, q, 2)])
            dets, obs = {}, {}
            for sector in SECTORS:
                sets, flips = foot[sector]
                acc, o = frozenset(), False
                for col in cols:
                    acc = acc ^ sets[col]
                    o ^= bool(flips[col])
                dets[sector], obs[sector] = acc, o
            yield Mechanism(i, qubits, code, prob, dets, obs)


def build_decoding_graph(sched, noise: NoiseModel) -> dict:
    """``{sector: DecodingGraph}`` for a schedule from :func:`build_circuit`."""
    for name in ("p", "p_sh", "p_leak", "p_rash"):
        if getattr(noise, name) >= 0.5:
            raise ValueError("noise probabilities must be < 0.5 for graph weights")
    graphs = {s: DecodingGraph(s, sched.detector_count(s)) for s in SECTORS}
    for mech in enumerate_mechanisms(sched.d, sched.cycles, noise):
        for s in SECTORS:
            graphs[s].add(mech.dets[s], mech.obs[s], mech.prob)
    return graphs
