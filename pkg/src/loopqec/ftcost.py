"""Logical-operation costs and space-time savings of stacked distillation.

A stack of ``k`` code layers shares one loop array; ``A`` stacks are needed
for a 15-to-1 distillation block and the block takes ``D`` code cycles.  The
space-time overhead is ``A * D * T_cycle``.  All factors are exact
:class:`fractions.Fraction` objects; :func:`two_sig` renders them the way
they are usually quoted.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from .schedules import Code


class LogicalOp(enum.Enum):
    H = "H"
    S = "S"
    CNOT_SURGERY = "CNOT_surgery"
    CNOT_TRANSVERSAL = "CNOT_transversal"
    T_INIT = "T_init"
    PAULI_INIT = "PauliInit"
    PAULI_MEAS = "PauliMeas"


# (coefficient of d, constant) per operation.
_OP_CYCLES = {
    Code.SURFACE: {
        LogicalOp.H: (3, 0),
        LogicalOp.S: (1, 0),
        LogicalOp.CNOT_SURGERY: (2, 0),
        LogicalOp.CNOT_TRANSVERSAL: (0, 0),
        LogicalOp.T_INIT: (0, 6),
        LogicalOp.PAULI_INIT: (0, 0),
        LogicalOp.PAULI_MEAS: (0, 0),
    },
}
_OP_CYCLES[Code.COLOUR] = {**_OP_CYCLES[Code.SURFACE], LogicalOp.H: (0, 0), LogicalOp.S: (0, 0)}


def logical_op_cycles(code: Code, op: LogicalOp, d: int) -> int:
    a, b = _OP_CYCLES[code][op]
    return a * d + b


class DistillationCircuit(enum.Enum):
    WIDE_SHALLOW = "wide_shallow"
    NARROW_DEEP = "narrow_deep"


@dataclass(frozen=True)
class DistillationScheme:
    code: Code
    k: int
    A: int
    D_coefficient: int
    circuit: DistillationCircuit

    def cycles(self, d: int) -> int:
        return self.D_coefficient * d


# k -> (stacks A, D/d for colour, D/d for surface, circuit)
_MSD = {
    1: (50, 12, 13, DistillationCircuit.WIDE_SHALLOW),
    5: (3, 6, 9, DistillationCircuit.NARROW_DEEP),
    10: (1, 1, 3, DistillationCircuit.NARROW_DEEP),
}

APPROXIMATE_STACKS_NOTE = "A=50 for unstacked distillation is an order-of-magnitude count"


def distillation_scheme(code: Code, k: int) -> DistillationScheme:
    try:
        A, colour, surface, circuit = _MSD[k]
    except KeyError:
        raise ValueError(f"unsupported layer count k={k}; choose 1, 5 or 10") from None
    return DistillationScheme(code, k, A, colour if code is Code.COLOUR else surface, circuit)


def msd_cycles(code: Code, k: int, d: int) -> int:
    if d < 1:
        raise ValueError("d must be >= 1")
    return distillation_scheme(code, k).cycles(d)


@dataclass(frozen=True)
class SavingReport:
    space_factor: Fraction
    time_factor: Fraction
    assumptions: str = ""
    overhead: Fraction | None = None

    @property
    def spacetime_factor(self) -> Fraction:
        return self.space_factor * self.time_factor


def msd_spacetime(code: Code, k: int, d: int, T_cycle_k, T_cycle_baseline) -> SavingReport:
    """Savings of the ``k``-layer scheme against unstacked distillation."""
    T_k, T_1 = Fraction(T_cycle_k), Fraction(T_cycle_baseline)
    if T_k <= 0 or T_1 <= 0 or d < 1:
        raise ValueError("cycle times and d must be positive")
    s, b = distillation_scheme(code, k), distillation_scheme(code, 1)
    time = Fraction(b.cycles(d)) * T_1 / (s.cycles(d) * T_k)
    return SavingReport(
        Fraction(b.A, s.A),
        time,
        APPROXIMATE_STACKS_NOTE,
        Fraction(s.A * s.cycles(d)) * T_k,
    )


@dataclass(frozen=True)
class StageSaving:
    stage: str
    report: SavingReport | None
    space_text: str
    time_text: str


# Second distillation round: all 15 inputs must coexist with the code qubits.
_SECOND_ROUND = {5: (5, 9), 10: (3, 7), 1: (50, 13)}


def full_ft_savings(k: int) -> list[StageSaving]:
    """Per-stage savings of a two-round distillation computation.

    Cycle times are taken equal across schemes.
    """
    if k not in _SECOND_ROUND:
        raise ValueError("k must be 1, 5 or 10")
    equal = "equal code-cycle time for all schemes; " + APPROXIMATE_STACKS_NOTE
    first = msd_spacetime(Code.SURFACE, k, 1, 1, 1)
    first = SavingReport(first.space_factor, first.time_factor, equal)
    A2, D2 = _SECOND_ROUND[k]
    A1, D1 = _SECOND_ROUND[1]
    second = SavingReport(Fraction(A1, A2), Fraction(D1, D2), equal)
    if k == 1:
        main = StageSaving("main computation", SavingReport(Fraction(1), Fraction(1), equal), "1", "1")
    else:
        main = StageSaving("main computation", None, f">= {k}", f"intra-stack CNOT: O(d); inter-stack CNOT: <= {k}")
    return [
        StageSaving("1st round MSD", first, two_sig(first.space_factor), two_sig(first.time_factor)),
        StageSaving("2nd round MSD", second, two_sig(second.space_factor), two_sig(second.time_factor)),
        main,
    ]


def scheme_circuit_summary(circuit: DistillationCircuit) -> dict:
    if circuit is DistillationCircuit.WIDE_SHALLOW:
        # 16 code qubits plus one teleportation qubit per T-dagger location.
        return {"qubits": 31, "multi_target_cnot_rounds": 5, "teleport_rounds": 1, "t_rounds": 1, "noisy_t_inputs": 15}
    return {"qubits": 10, "multi_target_cnot_rounds": 0, "teleport_rounds": 3, "t_rounds": 3, "noisy_t_inputs": 15}


def two_sig(x) -> str:
    """Two significant figures, trailing zeros dropped (216.7 -> '220')."""
    x = float(x)
    if x == 0:
        return "0"
    return f"{float(f'{x:.2g}'):g}" if abs(x) < 1e15 else f"{x:.2g}"
