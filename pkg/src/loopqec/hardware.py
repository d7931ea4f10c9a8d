"""Silicon spin-qubit presets and the pipelining-scheme solver.

The solver decides, for ``k`` qubits per loop, how the stream gap and the
data-loop period are chosen:

* steady flow when ``k`` already fits with the gap set by the slowest
  station;
* no data buffering: the gap shrinks to ``T_loop_min / (k-1)`` and only the
  measurement station of the ancilla pipeline is buffered;
* buffered data loops: every data round is held to a common period ``T``
  chosen so that the data (``3T``) and ancilla pipelines take equally long.

Ancilla times always come from :func:`constant_gap_time` on the emitted
ancilla pipeline, so they agree with the discrete-event simulator.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources

import tomli
from scipy import constants

from .pipeline import InfeasibleModelError, constant_gap_time, loop_capacity
from .schedules import (
    Code,
    CodeCycleModel,
    HardwareTiming,
    surface_ancilla_pipeline,
    surface_cycle,
)


def load_presets(path=None) -> dict[str, HardwareTiming]:
    if path is None:
        text = resources.files("loopqec.data").joinpath("presets.toml").read_text()
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    doc = tomli.loads(text)
    return {name: HardwareTiming.from_mapping(table) for name, table in doc.items()}


def preset(name: str, meas_devices: int | None = None) -> HardwareTiming:
    presets = load_presets()
    try:
        hw = presets[name.lower()]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(presets)}") from None
    return hw if meas_devices is None else hw.with_devices(meas_devices)


class Regime(enum.Enum):
    STEADY_FLOW = "steady_flow"
    NO_BUFFER_DATA_LIMITED = "no_buffer_data_limited"
    NO_BUFFER_ANCILLA_LIMITED = "no_buffer_ancilla_limited"
    BUFFERED_DATA_PIPELINE = "buffered_data_pipeline"


@dataclass(frozen=True)
class SchemeSolution:
    k: int
    m: int
    tau_gap: Fraction
    T_loop_min: Fraction
    T_cycle: Fraction
    regime: Regime
    T_data_eff: Fraction
    T_anc_eff: Fraction

    def model(self, hw: HardwareTiming) -> CodeCycleModel:
        base = surface_cycle(hw)
        return CodeCycleModel(
            Code.SURFACE,
            hw,
            base.T_circ_data,
            base.T_circ_anc,
            self.T_cycle,
            self.T_loop_min,
            loop_capacity(self.T_loop_min, self.tau_gap) if self.tau_gap else 1,
            self.tau_gap,
            self.T_data_eff - base.T_circ_data,
            self.T_anc_eff - base.T_circ_anc,
        )


def max_k_no_buffer(hw: HardwareTiming) -> int:
    if hw.tau_cz == 0:
        raise InfeasibleModelError("tau_cz = 0: no bound on qubits per loop")
    return math.floor((hw.tau_sh + hw.tau_cz + hw.tau_h) / hw.tau_cz) + 1


def required_meas_devices(hw: HardwareTiming, k: int) -> int:
    """Fewest measurement devices keeping the unbuffered data loop rate-limiting.

    The ancilla pipeline buffered to gap ``T_loop_min/(k-1)`` takes
    ``tau_sh + 4 tau_cz + tau_init + k tau_meas/m - T_loop_min``; requiring
    that to stay within ``3 tau_sh + 8 tau_cz + 2 tau_h`` gives the bound.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    budget = 3 * hw.tau_sh + 5 * hw.tau_cz + 3 * hw.tau_h - hw.tau_init
    if budget <= 0:
        raise InfeasibleModelError("ancilla pipeline always rate-limiting")
    return max(1, math.ceil(Fraction(k) * hw.tau_meas / budget))


def _anc_eff(hw: HardwareTiming, k: int, gap: Fraction) -> Fraction:
    return constant_gap_time(surface_ancilla_pipeline(hw), k, gap).T_eff


def _balanced_loop_period(hw: HardwareTiming, k: int) -> Fraction:
    # Solve 3T = T_anc + sum_s max((k-1) tau_s - T, 0) over ancilla stations;
    # the right side is piecewise linear, so try each active set in turn.
    anc = surface_ancilla_pipeline(hw)
    taus = sorted((s.duration for s in anc.steps if s.is_station), reverse=True)
    T_anc = sum(anc.durations, Fraction(0))
    for n_active in range(len(taus) + 1):
        active = taus[:n_active]
        T = (T_anc + (k - 1) * sum(active, Fraction(0))) / (3 + n_active)
        if all((k - 1) * t > T for t in active) and all((k - 1) * t <= T for t in taus[n_active:]):
            return T
    raise AssertionError("no consistent active set")


def solve_scheme(hw: HardwareTiming, k: int) -> SchemeSolution:
    if k < 1:
        raise ValueError("k must be >= 1")
    base = surface_cycle(hw)
    m = hw.meas_devices
    if k <= base.K_loop:
        return SchemeSolution(
            k, m, base.tau_gap, base.T_loop_min, base.T_cycle, Regime.STEADY_FLOW, base.T_circ_data, base.T_circ_anc
        )

    data_station = max(hw.tau_cz, hw.tau_h)
    candidates = []

    gap = base.T_loop_min / (k - 1)
    if gap >= data_station and gap > 0:
        anc = _anc_eff(hw, k, gap)
        regime = Regime.NO_BUFFER_DATA_LIMITED if base.T_circ_data >= anc else Regime.NO_BUFFER_ANCILLA_LIMITED
        candidates.append(SchemeSolution(k, m, gap, base.T_loop_min, max(base.T_circ_data, anc), regime, base.T_circ_data, anc))

    T = _balanced_loop_period(hw, k)
    slowest_round = hw.tau_sh + 4 * hw.tau_cz + max(hw.tau_h - hw.tau_cz, 0)
    if T >= slowest_round and T > base.T_loop_min and T / (k - 1) >= data_station:
        gap = T / (k - 1)
        candidates.append(
            SchemeSolution(k, m, gap, T, 3 * T, Regime.BUFFERED_DATA_PIPELINE, 3 * T, _anc_eff(hw, k, gap))
        )

    if not candidates:
        raise InfeasibleModelError(f"requires sub-CZ gap, unsupported (k={k})")
    # Stable min keeps the unbuffered scheme on ties.
    return min(candidates, key=lambda s: s.T_cycle)


def dipole_coupling(r: float) -> float:
    """Magnetic dipole coupling between two electron spins, in Hz."""
    if r <= 0:
        raise ValueError("separation must be positive")
    g = abs(constants.physical_constants["electron g factor"][0])
    mu_b = constants.physical_constants["Bohr magneton"][0]
    return constants.mu_0 / (4 * math.pi) * g**2 * mu_b**2 / (constants.h * r**3)
