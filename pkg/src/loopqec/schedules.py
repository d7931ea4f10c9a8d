"""Per-cycle pipelines for surface- and colour-code patches built from loops.

Each data qubit rides its own loop and meets the ancillas at the loop
corners.  A surface-code data qubit goes round its square loop three times
per code cycle (Z checks, then the Hadamard-sandwiched X checks); the
ancilla goes round once between initialisation and measurement.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from .pipeline import (
    InfeasibleModelError,
    PipelineSpec,
    Step,
    StepKind,
    as_duration,
    loop_capacity,
)


@dataclass(frozen=True)
class HardwareTiming:
    """Step durations in nanoseconds.

    ``tau_sh`` is one full trip round a loop.  ``meas_devices`` measurement
    devices share the load, so a measurement effectively costs
    ``tau_meas / meas_devices``.
    """

    tau_sh: Fraction
    tau_cz: Fraction
    tau_h: Fraction
    tau_init: Fraction = Fraction(0)
    tau_meas: Fraction = Fraction(0)
    meas_devices: int = 1

    def __post_init__(self):
        for name in ("tau_sh", "tau_cz", "tau_h", "tau_init", "tau_meas"):
            object.__setattr__(self, name, as_duration(getattr(self, name)))
        if int(self.meas_devices) != self.meas_devices or self.meas_devices < 1:
            raise ValueError("meas_devices must be a positive integer")

    @property
    def tau_meas_eff(self) -> Fraction:
        return self.tau_meas / self.meas_devices

    def with_devices(self, m: int) -> "HardwareTiming":
        return HardwareTiming(self.tau_sh, self.tau_cz, self.tau_h, self.tau_init, self.tau_meas, m)

    @classmethod
    def from_mapping(cls, table: dict) -> "HardwareTiming":
        return cls(
            as_duration(table["tau_sh_ns"]),
            as_duration(table["tau_cz_ns"]),
            as_duration(table["tau_h_ns"]),
            as_duration(table.get("tau_init_ns", 0)),
            as_duration(table.get("tau_meas_ns", 0)),
            int(table.get("meas_devices", 1)),
        )

    def to_mapping(self) -> dict:
        def enc(x):
            return int(x) if x.denominator == 1 else str(x)

        return {
            "tau_sh_ns": enc(self.tau_sh),
            "tau_cz_ns": enc(self.tau_cz),
            "tau_h_ns": enc(self.tau_h),
            "tau_init_ns": enc(self.tau_init),
            "tau_meas_ns": enc(self.tau_meas),
            "meas_devices": self.meas_devices,
        }


class Code(enum.Enum):
    SURFACE = "surface"
    COLOUR = "colour"


@dataclass(frozen=True)
class CodeCycleModel:
    code: Code
    hw: HardwareTiming
    T_circ_data: Fraction
    T_circ_anc: Fraction
    T_cycle: Fraction
    T_loop_min: Fraction
    K_loop: int
    tau_gap: Fraction
    buffering_data: Fraction = Fraction(0)
    buffering_anc: Fraction = Fraction(0)
    doubled_ancilla: bool = False

    @property
    def data_limited(self) -> bool:
        return self.T_circ_data + self.buffering_data >= self.T_circ_anc + self.buffering_anc


def _station_max(hw: HardwareTiming) -> Fraction:
    # Shuttling edges carry several qubits at once and never limit the rate.
    return max(hw.tau_cz, hw.tau_h, hw.tau_init, hw.tau_meas_eff)


def _capacity(T_loop_min: Fraction, gap: Fraction) -> int:
    if T_loop_min == 0:
        return 1
    return loop_capacity(T_loop_min, gap)


def surface_cycle(hw: HardwareTiming) -> CodeCycleModel:
    """Steady-flow surface-code cycle: every gap equals the slowest station."""
    data = 3 * hw.tau_sh + 8 * hw.tau_cz + 2 * hw.tau_h
    anc = hw.tau_sh + 4 * hw.tau_cz + hw.tau_init + hw.tau_meas_eff
    # The last round is the shortest unless H is slower than three CZs.
    loop_min = hw.tau_sh + min(hw.tau_cz + hw.tau_h, 4 * hw.tau_cz)
    gap = _station_max(hw)
    return CodeCycleModel(Code.SURFACE, hw, data, anc, max(data, anc), loop_min, _capacity(loop_min, gap), gap)


def colour_cycle(hw: HardwareTiming, doubled_ancilla: bool = False) -> CodeCycleModel:
    """Steady-flow colour-code cycle on triangular data loops.

    Each hexagonal ancilla loop measures one X and one Z check in turn.  With
    ``doubled_ancilla`` two ancillas share the work, one check each, which
    halves the ancilla pipeline.
    """
    data = 2 * hw.tau_sh + 12 * hw.tau_cz + 2 * hw.tau_h
    rounds = 1 if doubled_ancilla else 2
    anc = rounds * (hw.tau_sh + 6 * hw.tau_cz + hw.tau_init + hw.tau_meas_eff)
    loop_min = hw.tau_sh + 6 * hw.tau_cz + hw.tau_h
    gap = _station_max(hw)
    return CodeCycleModel(
        Code.COLOUR, hw, data, anc, max(data, anc), loop_min, _capacity(loop_min, gap), gap, doubled_ancilla=doubled_ancilla
    )


def qec_pipeline_time(model: CodeCycleModel, D: int, k: int) -> Fraction:
    """Time for ``k`` logical qubits in one stack to run ``D`` code cycles."""
    if D < 1 or k < 1:
        raise ValueError("D and k must be >= 1")
    if k > model.K_loop:
        raise InfeasibleModelError(f"collision: k={k} exceeds K_loop={model.K_loop}")
    return D * model.T_cycle + (k - 1) * model.tau_gap


def _cz(hw, label):
    return Step(StepKind.GATE2Q, hw.tau_cz, True, label)


def _h(hw, label="H"):
    return Step(StepKind.GATE1Q, hw.tau_h, True, label)


def _edge(dt):
    return Step(StepKind.SHUTTLE, dt, True, "edge")


def _round(body: list[Step], pad_to: Fraction | None) -> list[Step]:
    if pad_to is not None:
        t = sum((s.duration for s in body), Fraction(0))
        if pad_to < t:
            raise InfeasibleModelError("round padding shorter than the round itself")
        if pad_to > t:
            body = body + [Step(StepKind.BUFFER, pad_to - t, True, "hold")]
    return body


def surface_data_pipeline(hw: HardwareTiming, pad_rounds_to: Fraction | None = None) -> PipelineSpec:
    """Three loop rounds: Z checks, then H + X checks split 3/1, then H.

    The last round is the shortest, ``tau_sh + tau_cz + tau_h``.  With
    ``pad_rounds_to`` every round ends in a hold so all rounds take that long.
    """
    e = hw.tau_sh / 4
    r1 = []
    for c in ("NE", "SE", "SW", "NW"):
        r1 += [_cz(hw, f"CZ-Z-{c}"), _edge(e)]
    r2 = [_h(hw)]
    for c in ("NW", "NE", "SE"):
        r2 += [_cz(hw, f"CZ-X-{c}"), _edge(e)]
    r2 += [_edge(e)]
    r3 = [_cz(hw, "CZ-X-SW"), _h(hw), _edge(e), _edge(e), _edge(e), _edge(e)]
    steps, rounds = [], []
    for body in (r1, r2, r3):
        body = _round(body, pad_rounds_to)
        rounds.append((len(steps), len(steps) + len(body)))
        steps += body
    return PipelineSpec(tuple(steps), tuple(rounds), cyclic=True)


def surface_ancilla_pipeline(hw: HardwareTiming) -> PipelineSpec:
    e = hw.tau_sh / 4
    steps = [Step(StepKind.INIT, hw.tau_init, False, "init")]
    for i in range(4):
        steps += [_cz(hw, f"CZ-{i}"), _edge(e)]
    steps.append(Step(StepKind.MEASURE, hw.tau_meas_eff, False, "measure"))
    return PipelineSpec(tuple(steps), ((1, 9),))


def colour_data_pipeline(hw: HardwareTiming) -> PipelineSpec:
    e = hw.tau_sh / 3
    r1 = [_h(hw)]
    for _ in range(3):
        r1 += [_cz(hw, "CZ-X"), _cz(hw, "CZ-X"), _edge(e)]
    r2 = []
    for _ in range(3):
        r2 += [_cz(hw, "CZ-Z"), _cz(hw, "CZ-Z"), _edge(e)]
    r2.append(_h(hw))
    return PipelineSpec(tuple(r1 + r2), ((0, len(r1)), (len(r1), len(r1) + len(r2))), cyclic=True)


def colour_ancilla_pipeline(hw: HardwareTiming, doubled_ancilla: bool = False) -> PipelineSpec:
    e = hw.tau_sh / 6
    steps, rounds = [], []
    for basis in ("X",) if doubled_ancilla else ("X", "Z"):
        steps.append(Step(StepKind.INIT, hw.tau_init, False, "init"))
        start = len(steps)
        for _ in range(6):
            steps += [_cz(hw, f"CZ-{basis}"), _edge(e)]
        rounds.append((start, len(steps)))
        steps.append(Step(StepKind.MEASURE, hw.tau_meas_eff, False, "measure"))
    return PipelineSpec(tuple(steps), tuple(rounds))


def emit_cycle_pipeline(model: CodeCycleModel) -> tuple[PipelineSpec, PipelineSpec]:
    """(data, ancilla) step lists for one code cycle of ``model``."""
    if model.code is Code.SURFACE:
        pad = None
        if model.buffering_data:
            pad = (model.T_circ_data + model.buffering_data) / 3
        return surface_data_pipeline(model.hw, pad), surface_ancilla_pipeline(model.hw)
    return colour_data_pipeline(model.hw), colour_ancilla_pipeline(model.hw, model.doubled_ancilla)
