from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from loopqec.ftcost import (
    DistillationCircuit,
    LogicalOp,
    distillation_scheme,
    full_ft_savings,
    logical_op_cycles,
    msd_cycles,
    msd_spacetime,
    scheme_circuit_summary,
    two_sig,
)
from loopqec.hardware import preset, solve_scheme
from loopqec.schedules import Code


@pytest.mark.parametrize("code, op, expected", [
    (Code.SURFACE, LogicalOp.H, 21),
    (Code.SURFACE, LogicalOp.S, 7),
    (Code.SURFACE, LogicalOp.CNOT_SURGERY, 14),
    (Code.SURFACE, LogicalOp.CNOT_TRANSVERSAL, 0),
    (Code.SURFACE, LogicalOp.T_INIT, 6),
    (Code.SURFACE, LogicalOp.PAULI_MEAS, 0),
    (Code.COLOUR, LogicalOp.H, 0),
    (Code.COLOUR, LogicalOp.S, 0),
    (Code.COLOUR, LogicalOp.CNOT_SURGERY, 14),
])
def test_logical_op_cycles_d7(code, op, expected):
    assert logical_op_cycles(code, op, 7) == expected


@pytest.mark.parametrize("code, coeffs", [(Code.COLOUR, (12, 6, 1)), (Code.SURFACE, (13, 9, 3))])
def test_msd_cycles(code, coeffs):
    for k, c in zip((1, 5, 10), coeffs):
        assert msd_cycles(code, k, 1) == c
        assert msd_cycles(code, k, 11) == 11 * c


def test_stack_counts_and_circuits():
    assert [distillation_scheme(Code.SURFACE, k).A for k in (1, 5, 10)] == [50, 3, 1]
    assert distillation_scheme(Code.SURFACE, 1).circuit is DistillationCircuit.WIDE_SHALLOW
    with pytest.raises(ValueError, match="unsupported"):
        msd_cycles(Code.SURFACE, 3, 5)


@pytest.mark.parametrize("code, k, overhead", [
    (Code.COLOUR, 1, 600), (Code.COLOUR, 5, 18), (Code.COLOUR, 10, 1),
    (Code.SURFACE, 1, 650), (Code.SURFACE, 5, 27), (Code.SURFACE, 10, 3),
])
def test_symbolic_overhead(code, k, overhead):
    assert msd_spacetime(code, k, 1, 1, 1).overhead == overhead


# (preset, k, m) -> (quoted time factor, quoted space-time factor, tolerance)
SILICON = [
    ("edsr", 1, 1, 1, 1, 0.0),
    ("edsr", 5, 1, 1.2, 19, 0.1),
    ("edsr", 5, 2, 1.4, 24, 0.1),
    ("edsr", 10, 1, 2, 100, 0.1),
    ("edsr", 10, 3, 4.3, 200, 0.1),
    ("esr", 5, 1, None, 24, 0.05),
    ("esr", 10, 1, None, 140, 0.05),
]


@pytest.mark.parametrize("name, k, m, time, spacetime, tol", SILICON)
def test_silicon_savings(name, k, m, time, spacetime, tol):
    base = solve_scheme(preset(name), 1).T_cycle
    rep = msd_spacetime(Code.SURFACE, k, 1, solve_scheme(preset(name, m), k).T_cycle, base)
    if time is not None:
        assert two_sig(rep.time_factor) == f"{time:g}"
    assert float(rep.spacetime_factor) == pytest.approx(spacetime, rel=tol)


def test_edsr_best_row_exact():
    rep = msd_spacetime(Code.SURFACE, 10, 1, 3850, 3850)
    assert rep.time_factor == Fraction(13, 3)
    assert rep.spacetime_factor == Fraction(650, 3)


@pytest.mark.parametrize("k, first, second", [
    (5, (16.6, 1.4), (10, 1.4)),
    (10, (50, 4.3), (16.6, 1.9)),
])
def test_full_ft(k, first, second):
    stages = full_ft_savings(k)
    for stage, (space, time) in zip(stages[:2], (first, second)):
        assert float(stage.report.space_factor) == pytest.approx(space, rel=0.05)
        assert float(stage.report.time_factor) == pytest.approx(time, rel=0.05)
        assert "equal code-cycle time" in stage.report.assumptions
    assert stages[2].report is None and stages[2].space_text == f">= {k}"


def test_full_ft_trivial():
    for stage in full_ft_savings(1):
        assert stage.report.spacetime_factor == 1


def test_circuit_summaries():
    wide = scheme_circuit_summary(DistillationCircuit.WIDE_SHALLOW)
    narrow = scheme_circuit_summary(DistillationCircuit.NARROW_DEEP)
    assert wide["qubits"] == 31 and narrow["qubits"] == 10 and narrow["t_rounds"] == 3
    assert wide["noisy_t_inputs"] == narrow["noisy_t_inputs"] == 15


@pytest.mark.parametrize("x, text", [(Fraction(650, 3), "220"), (Fraction(13, 3), "4.3"), (1, "1"), (19.3, "19")])
def test_two_sig(x, text):
    assert two_sig(x) == text


@given(
    code=st.sampled_from(list(Code)),
    k=st.sampled_from([1, 5, 10]),
    d=st.integers(1, 40),
    t1=st.integers(1, 10**5),
    tk=st.integers(1, 10**5),
)
def test_spacetime_multiplicative(code, k, d, t1, tk):
    rep = msd_spacetime(code, k, d, tk, t1)
    assert rep.spacetime_factor == rep.space_factor * rep.time_factor
    base = msd_spacetime(code, 1, d, t1, t1)
    assert base.overhead / rep.overhead == rep.spacetime_factor
