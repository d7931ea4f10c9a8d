"""One memory experiment on the planar code as a flat list of frame operations.

Every code cycle follows the looped data pipeline: the data qubit goes round
its loop once meeting the Z-check ancillas, is rotated by H, goes round
(almost) twice more for the X checks, and is rotated back.  Noise enters
only at :class:`Slot` and :class:`PairSlot` operations; which channel a slot
carries is decided later by the noise model, so one schedule serves every
noise setting.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .layout import X_ORDER, Z_ORDER, SurfaceLayout


@dataclass(frozen=True)
class Reset:
    qubits: np.ndarray


@dataclass(frozen=True)
class CZ:
    a: np.ndarray
    b: np.ndarray


@dataclass(frozen=True)
class H:
    qubits: np.ndarray


@dataclass(frozen=True)
class Measure:
    """X-basis measurement; records the Z component of the frame."""

    qubits: np.ndarray
    record: int


@dataclass(frozen=True)
class Slot:
    """Single-qubit noise location.

    kind is one of ``init``, ``meas``, ``h``, ``dephase``, ``twirl``,
    ``rashba`` and ``leak_end``; ``repeat`` counts independent applications
    of the same channel (consecutive shuttling edges).
    """

    kind: str
    qubits: np.ndarray
    repeat: int = 1


@dataclass(frozen=True)
class PairSlot:
    """Noise after a CZ layer, including leakage spreading to partners."""

    a: np.ndarray
    b: np.ndarray


@dataclass(frozen=True)
class LeakFlag:
    qubits: np.ndarray


@dataclass(frozen=True)
class LeakMeasure:
    qubits: np.ndarray


@dataclass
class CircuitSchedule:
    layout: SurfaceLayout
    cycles: int
    ops: list = field(default_factory=list)
    # record index -> ("x" | "z", cycle)
    records: list = field(default_factory=list)
    # per data qubit and cycle: timeline of (slot kind) for bookkeeping
    data_timeline: list = field(default_factory=list)

    @property
    def d(self) -> int:
        return self.layout.d

    def detector_count(self, sector: str) -> int:
        checks = self.layout.z_checks if sector == "x" else self.layout.x_checks
        return len(checks) * (self.cycles + 1)

    def data_slot_counts(self) -> Counter:
        """Slots one data qubit passes in one cycle (active or idle)."""
        return Counter(self.data_timeline)


def build_circuit(d: int, cycles: int | None = None) -> CircuitSchedule:
    """``cycles`` noisy syndrome rounds (default ``d``) on a distance-``d`` patch.

    A final, noiseless round is read off the data frame by the sampler.
    """
    if d < 3 or d % 2 == 0:
        raise ValueError("distance must be odd and >= 3")
    cycles = d if cycles is None else cycles
    if cycles < 1:
        raise ValueError("cycles must be >= 1")
    lay = SurfaceLayout(d)
    data, xa, za = lay.data, lay.x_checks, lay.z_checks
    everyone = np.arange(lay.n_qubits)
    z_layers = lay.check_layers(za, Z_ORDER)
    x_layers = lay.check_layers(xa, X_ORDER)
    sched = CircuitSchedule(lay, cycles)
    ops = sched.ops
    timeline = []

    def ancilla_start(anc):
        ops.append(Reset(anc))
        ops.append(Slot("init", anc))
        ops.append(Slot("dephase", anc))
        ops.append(Slot("twirl", anc))

    def cz_layer(a, b, data_edges: int, anc):
        ops.append(CZ(a, b))
        ops.append(PairSlot(a, b))
        timeline.append("cz")
        ops.append(Slot("rashba", anc))
        if data_edges:
            ops.append(Slot("rashba", data, data_edges))
            timeline.extend(["edge"] * data_edges)

    def measure(anc, kind, c):
        ops.append(LeakMeasure(anc))
        ops.append(Slot("meas", anc))
        ops.append(Measure(anc, len(sched.records)))
        sched.records.append((kind, c))

    for c in range(cycles):
        timeline = []
        ops.append(LeakFlag(everyone))
        ops.append(Slot("dephase", data))
        ops.append(Slot("twirl", data))
        timeline += ["dephase", "twirl"]
        # Round 1: Z checks, one loop edge after each corner.
        ancilla_start(za)
        for a, b in z_layers:
            cz_layer(a, b, 1, za)
        measure(za, "z", c)
        # Rounds 2 and 3: H, X checks split 3/1 over the rounds, H.
        ops.append(H(data))
        ops.append(Slot("h", data))
        timeline.append("h")
        ancilla_start(xa)
        for j, (a, b) in enumerate(x_layers):
            cz_layer(a, b, (1, 1, 2, 0)[j], xa)
        measure(xa, "x", c)
        ops.append(H(data))
        ops.append(Slot("h", data))
        timeline.append("h")
        ops.append(Slot("rashba", data, 4))
        timeline.extend(["edge"] * 4)
        ops.append(Slot("leak_end", everyone))
        if c == 0:
            sched.data_timeline = timeline
    return sched
