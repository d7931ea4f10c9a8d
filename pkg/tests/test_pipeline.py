from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loopqec.pipeline import (
    GapSchedule,
    InfeasibleModelError,
    PipelineSpec,
    Step,
    StepKind,
    circuit_time,
    constant_gap_time,
    des_simulate,
    loop_capacity,
    midcircuit_measurement_buffer,
    peaks_and_troughs,
    rate_limiting_time,
    steady_flow_time,
    steady_loop_flow_time,
    varying_gap_time,
)
from loopqec.schedules import surface_cycle, surface_data_pipeline
from loopqec.hardware import preset


def linear(*d):
    return PipelineSpec.linear(d)


@pytest.mark.parametrize("durations, expected", [((3, 1, 2), 6), ((5,), 5)])
def test_circuit_time(durations, expected):
    assert circuit_time(linear(*durations)) == expected


def test_circuit_time_edsr_data():
    assert circuit_time(surface_data_pipeline(preset("edsr"))) == 3850


@pytest.mark.parametrize("k, expected", [(1, 6), (4, 15)])
def test_steady_flow(k, expected):
    res = steady_flow_time(linear(3, 1, 2), k)
    assert res.T_pipe == expected
    assert res.buffering_ledger == {}


@pytest.mark.parametrize(
    "T_loop, gap, expected",
    [(1125, 1000, 2), (1125, 250, 5), (0, 7, 1)],
)
def test_loop_capacity(T_loop, gap, expected):
    assert loop_capacity(T_loop, gap) == expected


def test_loop_capacity_zero_gap():
    with pytest.raises(InfeasibleModelError, match="unbounded capacity"):
        loop_capacity(10, 0)


def test_constant_gap_example():
    res = constant_gap_time(linear(4, 2), 3, 2)
    assert res.T_pipe == 14


def test_constant_gap_at_tau_max_is_steady_flow():
    spec = linear(3, 1, 2)
    assert constant_gap_time(spec, 5, 3).T_pipe == steady_flow_time(spec, 5).T_pipe


def test_steady_loop_flow_offloop_measure():
    steps = [Step(StepKind.GATE2Q, 300), Step(StepKind.GATE1Q, 100), Step(StepKind.MEASURE, 1000, on_loop=False)]
    spec = PipelineSpec(steps, ((0, 2),))
    res = steady_loop_flow_time(spec, 5)
    assert res.T_pipe == circuit_time(spec) + 4 * 700 + 4 * 300


def test_steady_loop_flow_matches_steady_flow_without_slow_spur():
    steps = [Step(StepKind.GATE2Q, 300), Step(StepKind.MEASURE, 200, on_loop=False)]
    spec = PipelineSpec(steps, ((0, 1),))
    assert steady_loop_flow_time(spec, 4).T_pipe == steady_flow_time(spec, 4).T_pipe


def test_varying_two_peaks():
    # Durations sum to 12; profile 5 -> 2 -> 4.
    spec = linear(5, 2, 1, 4)
    gaps = GapSchedule.varying([5, 2, 2, 4], [5, 5, 2, 2, 4])
    assert peaks_and_troughs(gaps.profile()) == ([5, 4], [2])
    assert varying_gap_time(spec, 3, gaps).T_pipe == 26
    assert des_simulate(spec, 3, gaps).completion_time == 26


def test_varying_single_peak_is_steady_flow():
    spec = linear(3, 1, 2)
    gaps = GapSchedule.varying([3, 3, 3])
    assert varying_gap_time(spec, 4, gaps).T_pipe == steady_flow_time(spec, 4).T_pipe


def test_infeasible_profile():
    with pytest.raises(InfeasibleModelError, match="infeasible gap schedule"):
        varying_gap_time(linear(3, 1), 2, GapSchedule.varying([2, 2]))


def test_des_k1():
    spec = linear(3, 1, 2)
    res = des_simulate(spec, 1, GapSchedule.steady_flow(spec))
    assert res.completion_time == 6 and res.collision is None


def test_des_edsr_data_k2():
    # The data stream is clocked by the slowest station of the whole code
    # cycle, the 1000 ns ancilla measurement.
    hw = preset("edsr")
    spec = surface_data_pipeline(hw)
    res = des_simulate(spec, 2, GapSchedule.steady_flow(spec, surface_cycle(hw).tau_gap))
    assert res.completion_time == 3850 + 1000
    assert res.collision is None


@pytest.mark.parametrize("span, window, clock, expected", [(900, 2, 1000, 0), (2500, 2, 1000, 1500), (1000, 1, 1000, 1000)])
def test_midcircuit_buffer(span, window, clock, expected):
    assert midcircuit_measurement_buffer(span, window, clock) == expected


def test_fractional_durations_exact():
    spec = linear("2850/9", 100)
    assert circuit_time(spec) == Fraction(2850, 9) + 100


def test_json_round_trip():
    spec = surface_data_pipeline(preset("edsr"))
    assert PipelineSpec.from_json(spec.to_json()) == spec


# Randomized oracle checks.

KINDS = list(StepKind)


@st.composite
def specs(draw, max_steps=12):
    n = draw(st.integers(1, max_steps))
    steps = []
    for _ in range(n):
        kind = draw(st.sampled_from(KINDS))
        steps.append(Step(kind, draw(st.integers(0, 10)), draw(st.booleans())))
    # Split into consecutive rounds; off-loop steps may fall anywhere.
    cuts = sorted(draw(st.sets(st.integers(1, n - 1), max_size=3))) if n > 1 else []
    bounds = [0] + cuts + [n]
    rounds = tuple((a, b) for a, b in zip(bounds, bounds[1:]))
    return PipelineSpec(tuple(steps), rounds, draw(st.booleans()))


@st.composite
def feasible_gaps(draw, spec):
    gaps = [
        draw(st.integers(s.duration if s.is_station else 0, 12)) if True else 0
        for s in spec.steps
    ]
    if draw(st.booleans()):
        return GapSchedule.varying(gaps)
    links = [draw(st.integers(0, 12)) for _ in range(len(gaps) + 1)]
    return GapSchedule.varying(gaps, links)


@settings(max_examples=250, deadline=None)
@given(spec=specs(), k=st.integers(1, 8))
def test_steady_flow_matches_des(spec, k):
    res = steady_flow_time(spec, k)
    des = des_simulate(spec, k, GapSchedule.steady_flow(spec))
    assert des.completion_time == res.T_pipe
    assert des.first_completion == res.T_eff == res.T_circ


@settings(max_examples=250, deadline=None)
@given(spec=specs(), k=st.integers(1, 8), gap=st.integers(1, 10))
def test_constant_gap_matches_des(spec, k, gap):
    res = constant_gap_time(spec, k, gap)
    des = des_simulate(spec, k, GapSchedule.constant_gap(spec, gap))
    assert des.completion_time == res.T_pipe
    assert des.first_completion == res.T_eff
    assert des.buffering_ledger == res.buffering_ledger


@settings(max_examples=250, deadline=None)
@given(spec=specs(), k=st.integers(1, 8))
def test_steady_loop_flow_matches_des(spec, k):
    res = steady_loop_flow_time(spec, k)
    des = des_simulate(spec, k, GapSchedule.steady_loop_flow(spec))
    assert des.completion_time == res.T_pipe


@settings(max_examples=250, deadline=None)
@given(data=st.data(), spec=specs(), k=st.integers(1, 8))
def test_varying_matches_des(data, spec, k):
    gaps = data.draw(feasible_gaps(spec))
    res = varying_gap_time(spec, k, gaps)
    des = des_simulate(spec, k, gaps)
    assert des.completion_time == res.T_pipe
    assert des.first_completion == res.T_eff
    assert des.buffering_ledger == res.buffering_ledger


@settings(max_examples=200, deadline=None)
@given(spec=specs(), k=st.integers(1, 8), gap=st.integers(1, 10))
def test_station_collision_free_under_feasible_gaps(spec, k, gap):
    des = des_simulate(spec, k, GapSchedule.constant_gap(spec, gap))
    assert des.collision is None or des.collision.kind == "loop"


@settings(max_examples=200, deadline=None)
@given(spec=specs(), gap=st.integers(1, 10))
def test_capacity_tight(spec, gap):
    T_loop = spec.loop_min_time()
    if T_loop is None:
        return
    K = loop_capacity(T_loop, gap)
    sched = GapSchedule.constant_gap(spec, gap)
    # Slow stations widen the stream locally; the bound is for uniform gaps.
    if any(g != gap for g in sched.gaps):
        return
    assert des_simulate(spec, K, sched).collision is None
    hit = des_simulate(spec, K + 1, sched).collision
    assert hit is not None and hit.kind == "loop"


@settings(max_examples=200, deadline=None)
@given(data=st.data(), spec=specs(), k=st.integers(1, 8))
def test_sequential_bound_and_constant_gap_optimality(data, spec, k):
    steady = steady_flow_time(spec, k)
    assert steady.T_pipe <= k * steady.T_circ or steady.T_circ == 0
    gaps = data.draw(feasible_gaps(spec))
    assert varying_gap_time(spec, k, gaps).T_pipe >= steady.T_pipe
    peaks, troughs = peaks_and_troughs(gaps.profile())
    cost = sum(p - t for p, t in zip(peaks, [0] + troughs))
    assert cost >= rate_limiting_time(spec)


@settings(max_examples=200, deadline=None)
@given(spec=specs(), k=st.integers(1, 7), i=st.integers(0, 11), extra=st.integers(1, 5))
def test_monotone(spec, k, i, extra):
    base = steady_flow_time(spec, k).T_pipe
    assert steady_flow_time(spec, k + 1).T_pipe >= base
    i %= len(spec.steps)
    steps = list(spec.steps)
    s = steps[i]
    steps[i] = Step(s.kind, s.duration + extra, s.on_loop)
    bigger = PipelineSpec(tuple(steps), spec.rounds, spec.cyclic)
    assert steady_flow_time(bigger, k).T_pipe >= base
