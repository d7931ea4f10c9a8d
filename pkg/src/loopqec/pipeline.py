"""Timing of linear and looped qubit pipelines.

A pipeline is an ordered list of steps that every qubit in a stream visits
in turn.  Qubits enter one after another separated by a time gap; the gap
may change along the pipeline when qubits are held on the shuttling tracks.

Two kinds of step exist:

* *stations* (gates, initialisation, measurement) hold a single qubit at a
  time, so the gap of the stream passing through a station must be at least
  the station's duration;
* *transit* steps (shuttling edges and explicit buffers) carry any number of
  qubits at once and impose no gap constraint.

The closed-form schemes (steady flow, constant gap, steady loop flow and
arbitrary varying gaps) are cross-checked by :func:`des_simulate`, which
propagates every qubit through every step and checks station occupancy and
loop re-entry explicitly.

All durations are exact rationals (:class:`fractions.Fraction`) in
nanoseconds so that fractional gaps such as 2850/9 ns compare exactly.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

Duration = Union[int, Fraction]


class InfeasibleModelError(ValueError):
    """Raised when a requested schedule cannot be realised."""


class StepKind(enum.Enum):
    SHUTTLE = "shuttle"
    GATE1Q = "gate1q"
    GATE2Q = "gate2q"
    INIT = "init"
    MEASURE = "measure"
    BUFFER = "buffer"

    @property
    def is_station(self) -> bool:
        return self not in (StepKind.SHUTTLE, StepKind.BUFFER)


def as_duration(value) -> Fraction:
    """Convert ints, Fractions or ``"p/q"`` strings to an exact duration."""
    if isinstance(value, float):
        # Floats only come from JSON; keep them exact to their decimal form.
        value = Fraction(str(value))
    d = Fraction(value)
    if d < 0:
        raise ValueError(f"negative duration {value!r}")
    return d


@dataclass(frozen=True)
class Step:
    kind: StepKind
    duration: Fraction
    on_loop: bool = True
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "duration", as_duration(self.duration))

    @property
    def is_station(self) -> bool:
        return self.kind.is_station


@dataclass(frozen=True)
class PipelineSpec:
    """An ordered step list with its partition into loop rounds.

    Args:
        steps: the steps in the order a qubit visits them.
        rounds: half-open ``(start, stop)`` index ranges, one per traversal
            of the shuttling loop.  Off-loop steps may sit outside every
            round.
        cyclic: if True the stream re-enters the first round after the last
            one (a code cycle that repeats), so the last round is also
            checked for head/tail collisions.
    """

    steps: tuple[Step, ...]
    rounds: tuple[tuple[int, int], ...] = ()
    cyclic: bool = False

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        object.__setattr__(self, "rounds", tuple(tuple(r) for r in self.rounds))
        if not self.steps:
            raise ValueError("pipeline has no steps")
        prev = 0
        covered = set()
        for start, stop in self.rounds:
            if not (prev <= start < stop <= len(self.steps)):
                raise ValueError(f"round {(start, stop)} out of order or out of range")
            covered.update(range(start, stop))
            prev = stop
        if self.rounds:
            for i, s in enumerate(self.steps):
                if s.on_loop and i not in covered:
                    raise ValueError(f"on-loop step {i} is not in any round")

    @classmethod
    def linear(cls, durations: Iterable[Duration], kind: StepKind = StepKind.GATE1Q) -> "PipelineSpec":
        return cls(tuple(Step(kind, d) for d in durations))

    @property
    def durations(self) -> list[Fraction]:
        return [s.duration for s in self.steps]

    def round_time(self, r: int) -> Fraction:
        start, stop = self.rounds[r]
        return sum((s.duration for s in self.steps[start:stop]), Fraction(0))

    def checked_rounds(self) -> list[int]:
        """Rounds after which the stream re-enters the loop."""
        n = len(self.rounds)
        if n == 0:
            return []
        return list(range(n)) if self.cyclic else list(range(n - 1))

    def loop_min_time(self) -> Fraction | None:
        rounds = self.checked_rounds()
        if not rounds:
            return None
        return min(self.round_time(r) for r in rounds)

    def to_json(self) -> dict:
        return {
            "steps": [
                {
                    "kind": s.kind.value,
                    "duration": _duration_json(s.duration),
                    "on_loop": s.on_loop,
                    **({"label": s.label} if s.label else {}),
                }
                for s in self.steps
            ],
            "rounds": [list(r) for r in self.rounds],
            "cyclic": self.cyclic,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "PipelineSpec":
        steps = tuple(
            Step(StepKind(s["kind"]), as_duration(s["duration"]), bool(s.get("on_loop", True)), s.get("label", ""))
            for s in doc["steps"]
        )
        return cls(steps, tuple(tuple(r) for r in doc.get("rounds", ())), bool(doc.get("cyclic", False)))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def _duration_json(d: Fraction):
    return int(d) if d.denominator == 1 else f"{d.numerator}/{d.denominator}"


class GapMode(enum.Enum):
    STEADY_FLOW = "steady_flow"
    STEADY_LOOP_FLOW = "steady_loop_flow"
    CONSTANT_GAP = "constant_gap"
    VARYING = "varying"


@dataclass(frozen=True)
class GapSchedule:
    """Inter-qubit time gaps along a pipeline.

    ``gaps[m]`` is the gap of the stream while it passes step ``m``.
    ``links[m]`` is the gap on the track in front of step ``m``
    (``links[M]`` is the stream leaving the pipeline).  By default a link
    carries the smaller of its neighbouring step gaps, which costs nothing
    extra; the constant-gap schemes relax every link back to their base gap.
    """

    gaps: tuple[Fraction, ...]
    links: tuple[Fraction, ...] = ()
    mode: GapMode = GapMode.VARYING
    base_gap: Fraction | None = None

    def __post_init__(self):
        gaps = tuple(as_duration(g) for g in self.gaps)
        object.__setattr__(self, "gaps", gaps)
        if not self.links:
            links = (gaps[0],) + tuple(min(a, b) for a, b in zip(gaps, gaps[1:])) + (gaps[-1],)
        else:
            links = tuple(as_duration(g) for g in self.links)
        if len(links) != len(gaps) + 1:
            raise ValueError("links must have one more entry than gaps")
        object.__setattr__(self, "links", links)

    def profile(self) -> list[Fraction]:
        """Interleaved link/step gap sequence ``[l0, g0, l1, g1, ..., lM]``."""
        out = []
        for link, gap in zip(self.links, self.gaps):
            out += [link, gap]
        out.append(self.links[-1])
        return out

    @classmethod
    def steady_flow(cls, spec: PipelineSpec, tau_max: Duration | None = None) -> "GapSchedule":
        """Constant gap equal to the slowest station.

        ``tau_max`` overrides the pipeline's own slowest station, which is
        needed when several coupled pipelines share one clock.
        """
        t = rate_limiting_time(spec) if tau_max is None else as_duration(tau_max)
        if t < rate_limiting_time(spec):
            raise InfeasibleModelError("steady-flow gap below the slowest station")
        n = len(spec.steps)
        return cls((t,) * n, (t,) * (n + 1), GapMode.STEADY_FLOW, t)

    @classmethod
    def constant_gap(cls, spec: PipelineSpec, tau_gap: Duration, mode: GapMode = GapMode.CONSTANT_GAP) -> "GapSchedule":
        """Gap ``tau_gap`` everywhere except at slower stations.

        A station slower than the gap forces its own duration as the local
        gap; the stream is compressed back to ``tau_gap`` right after it.
        """
        t = as_duration(tau_gap)
        gaps = tuple(max(t, s.duration) if s.is_station else t for s in spec.steps)
        return cls(gaps, (t,) * (len(gaps) + 1), mode, t)

    @classmethod
    def steady_loop_flow(cls, spec: PipelineSpec) -> "GapSchedule":
        return cls.constant_gap(spec, loop_rate_limiting_time(spec), GapMode.STEADY_LOOP_FLOW)

    @classmethod
    def varying(cls, gaps: Sequence[Duration], links: Sequence[Duration] = ()) -> "GapSchedule":
        return cls(tuple(gaps), tuple(links), GapMode.VARYING)


@dataclass(frozen=True)
class TimingResult:
    T_circ: Fraction
    tau_max: Fraction
    T_eff: Fraction
    T_pipe: Fraction
    k: int
    buffering_ledger: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CollisionReport:
    kind: str  # "station" or "loop"
    time: Fraction
    step: int
    qubits: tuple[int, int]
    round: int | None = None


@dataclass(frozen=True)
class DesResult:
    completion_time: Fraction
    first_completion: Fraction
    collision: CollisionReport | None
    buffering_ledger: dict


def circuit_time(spec: PipelineSpec) -> Fraction:
    return sum(spec.durations, Fraction(0))


def rate_limiting_time(spec: PipelineSpec) -> Fraction:
    """Duration of the slowest station (0 if the pipeline has none)."""
    return max((s.duration for s in spec.steps if s.is_station), default=Fraction(0))


def loop_rate_limiting_time(spec: PipelineSpec) -> Fraction:
    return max((s.duration for s in spec.steps if s.is_station and s.on_loop), default=Fraction(0))


def loop_capacity(T_loop_min: Duration, tau_gap: Duration) -> int:
    """Largest stream that fits in a loop without head/tail collision."""
    T, g = as_duration(T_loop_min), as_duration(tau_gap)
    if g == 0:
        raise InfeasibleModelError("unbounded capacity")
    return int(T // g) + 1


def _check_k(k: int):
    if k < 1:
        raise ValueError("k must be >= 1")


def _ledger_for(profile: Sequence[Fraction], k: int) -> dict:
    # A gap increase of d holds qubit n by (n-1)d, a decrease by (k-n)d.
    # Profile index 2m is the link in front of step m, 2m+1 the step itself;
    # waits are booked against the step they precede (or the last step).
    ledger: dict = {}
    prev = profile[0]
    for i in range(1, len(profile)):
        cur = profile[i]
        if cur != prev:
            step = (i - 1) // 2
            for n in range(1, k + 1):
                w = (n - 1) * (cur - prev) if cur > prev else (k - n) * (prev - cur)
                if w:
                    ledger[(n, step)] = ledger.get((n, step), 0) + w
        prev = cur
    return ledger


def _first_qubit_delay(profile: Sequence[Fraction], k: int) -> Fraction:
    drops = sum((max(a - b, 0) for a, b in zip(profile, profile[1:])), Fraction(0))
    return (k - 1) * drops


def steady_flow_time(spec: PipelineSpec, k: int, tau_max: Duration | None = None) -> TimingResult:
    _check_k(k)
    T = circuit_time(spec)
    t = rate_limiting_time(spec) if tau_max is None else as_duration(tau_max)
    return TimingResult(T, t, T, T + (k - 1) * t, k, {})


def constant_gap_time(spec: PipelineSpec, k: int, tau_gap: Duration) -> TimingResult:
    _check_k(k)
    g = as_duration(tau_gap)
    if g <= 0:
        raise ValueError("tau_gap must be positive")
    return _constant_gap(spec, k, g, GapSchedule.constant_gap(spec, g))


def steady_loop_flow_time(spec: PipelineSpec, k: int) -> TimingResult:
    _check_k(k)
    g = loop_rate_limiting_time(spec)
    return _constant_gap(spec, k, g, GapSchedule.steady_loop_flow(spec))


def _constant_gap(spec, k, g, sched) -> TimingResult:
    T = circuit_time(spec)
    extra = (k - 1) * sum((max(s.duration - g, 0) for s in spec.steps if s.is_station), Fraction(0))
    profile = sched.profile()
    return TimingResult(
        T, rate_limiting_time(spec), T + _first_qubit_delay(profile, k), T + extra + (k - 1) * g, k, _ledger_for(profile, k)
    )


def validate_gaps(spec: PipelineSpec, gaps: GapSchedule):
    if len(gaps.gaps) != len(spec.steps):
        raise ValueError("gap schedule length does not match the pipeline")
    for m, (s, g) in enumerate(zip(spec.steps, gaps.gaps)):
        if s.is_station and g < s.duration:
            raise InfeasibleModelError(f"infeasible gap schedule: gap {g} < duration {s.duration} at step {m}")


def peaks_and_troughs(profile: Sequence[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    """Alternating local maxima and the minima between them.

    Plateaus count once.  Returns ``(peaks, troughs)`` with
    ``len(troughs) == len(peaks) - 1``.
    """
    vals = [profile[0]]
    for v in profile[1:]:
        if v != vals[-1]:
            vals.append(v)
    peaks, troughs = [], []
    for i, v in enumerate(vals):
        left = vals[i - 1] if i > 0 else None
        right = vals[i + 1] if i + 1 < len(vals) else None
        if (left is None or v > left) and (right is None or v > right):
            peaks.append(v)
        elif left is not None and right is not None and v < left and v < right:
            troughs.append(v)
    return peaks, troughs


def varying_gap_time(spec: PipelineSpec, k: int, gaps: GapSchedule) -> TimingResult:
    _check_k(k)
    validate_gaps(spec, gaps)
    T = circuit_time(spec)
    profile = gaps.profile()
    peaks, troughs = peaks_and_troughs(profile)
    cost = sum((pk - tr for pk, tr in zip(peaks, [Fraction(0)] + troughs)), Fraction(0))
    return TimingResult(
        T, rate_limiting_time(spec), T + _first_qubit_delay(profile, k), T + (k - 1) * cost, k, _ledger_for(profile, k)
    )


def des_simulate(spec: PipelineSpec, k: int, gaps: GapSchedule) -> DesResult:
    """Propagate ``k`` qubits through ``spec`` under the gap schedule.

    Each stream reshaping (entering a link or a step with a different gap)
    is a hold on the track: the earliest release times spaced by the new gap
    that no qubit reaches before it physically arrives.  Stations are then
    checked for double occupancy, and each loop round for the head of the
    stream coming back before its tail has left.
    """
    _check_k(k)
    if len(gaps.gaps) != len(spec.steps):
        raise ValueError("gap schedule length does not match the pipeline")
    ledger: dict = {}
    events: list[CollisionReport] = []
    M = len(spec.steps)

    def reshape(arrivals: list[Fraction], gap: Fraction, step: int) -> list[Fraction]:
        first = max(a - n * gap for n, a in enumerate(arrivals))
        out = [first + n * gap for n in range(len(arrivals))]
        for n, (a, r) in enumerate(zip(arrivals, out)):
            if r != a:
                key = (n + 1, step)
                ledger[key] = ledger.get(key, 0) + (r - a)
        return out

    t = [n * gaps.links[0] for n in range(k)]
    starts: list[list[Fraction]] = []
    leaves: list[list[Fraction]] = []
    for m, step in enumerate(spec.steps):
        t = reshape(t, gaps.gaps[m], m)
        starts.append(t)
        if step.is_station:
            for n in range(1, k):
                if t[n] < t[n - 1] + step.duration:
                    events.append(CollisionReport("station", t[n], m, (n, n + 1)))
                    break
        t = [x + step.duration for x in t]
        t = reshape(t, gaps.links[m + 1], m)
        leaves.append(t)

    for r in spec.checked_rounds():
        start, stop = spec.rounds[r]
        head_back = leaves[stop - 1][0]
        tail_in = starts[start][k - 1]
        if head_back < tail_in:
            events.append(CollisionReport("loop", head_back, start, (1, k), r))

    collision = min(events, key=lambda e: e.time) if events else None
    return DesResult(leaves[M - 1][k - 1], leaves[M - 1][0], collision, ledger)


def midcircuit_measurement_buffer(meas_span: Duration, window_cycles: int, clock_period: Duration) -> Fraction:
    """Extra wait the array absorbs when a measurement overruns its window."""
    if window_cycles < 1:
        raise ValueError("window_cycles must be >= 1")
    return max(as_duration(meas_span) - (window_cycles - 1) * as_duration(clock_period), Fraction(0))
