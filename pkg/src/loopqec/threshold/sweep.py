"""Parameter sweeps and threshold crossings."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .noise import NoiseModel
from .sampler import RateResult, logical_error_rate

PARAMS = ("p", "p_sh", "p_leak", "p_rash")


class ThresholdError(ValueError):
    pass


@dataclass
class SweepConfig:
    param: str
    values: list
    distances: list
    shots: int
    seed: int = 0
    fixed: dict = field(default_factory=dict)
    cycles: int | None = None

    def __post_init__(self):
        if self.param not in PARAMS:
            raise ValueError(f"unknown sweep parameter {self.param!r}")
        if self.param in self.fixed:
            raise ValueError(f"{self.param} is both swept and fixed")
        self.values = sorted(float(v) for v in self.values)
        self.distances = sorted(int(d) for d in self.distances)

    @classmethod
    def from_mapping(cls, m: dict) -> "SweepConfig":
        m = dict(m)
        fixed = dict(m.pop("fixed", {}))
        return cls(fixed=fixed, **m)

    def noise(self, value: float) -> NoiseModel:
        return NoiseModel(**{**self.fixed, self.param: value})


@dataclass
class SweepResult:
    config: SweepConfig
    points: list  # RateResult per (distance, value), distance-major
    wall_time: float = 0.0

    def curve(self, d: int) -> list:
        return [r for r in self.points if r.d == d]

    def to_rows(self) -> list[dict]:
        return [
            {"param": self.config.param, "value": getattr(r.noise, self.config.param), "d": r.d,
             "shots": r.shots, "failures": r.failures, "rate": r.rate, "stderr": r.stderr}
            for r in self.points
        ]


def run_sweep(cfg: SweepConfig, threads: int = 1, progress=None) -> SweepResult:
    t0 = time.perf_counter()
    points = []
    for d in cfg.distances:
        for i, v in enumerate(cfg.values):
            # Each point gets its own stream so adding points leaves others unchanged.
            seed = int(np.random.SeedSequence([cfg.seed, d, i]).generate_state(1, np.uint64)[0])
            r = logical_error_rate(d, cfg.noise(v), cfg.shots, seed, cycles=cfg.cycles, threads=threads)
            points.append(r)
            if progress:
                progress(r)
    return SweepResult(cfg, points, time.perf_counter() - t0)


@dataclass
class ThresholdEstimate:
    param: str
    value: float
    ci_low: float
    ci_high: float
    distances: tuple

    def to_json(self) -> dict:
        return {"param": self.param, "value": self.value, "ci": [self.ci_low, self.ci_high],
                "distances": list(self.distances)}


def _log_rate(failures, shots):
    # Half-count continuity correction keeps zero-failure points finite.
    return np.log((np.asarray(failures) + 0.5) / (shots + 1.0))


def crossing(xs, small, large) -> float:
    """Where two log-rate curves cross, interpolating linearly in log x.

    ``small``/``large`` are log rates of the smaller and larger distance.
    Below threshold the larger code is better, so the difference goes from
    negative to positive; the first such sign change is used.
    """
    lx = np.log(np.asarray(xs, dtype=float))
    diff = np.asarray(large) - np.asarray(small)
    for i in range(len(xs) - 1):
        a, b = diff[i], diff[i + 1]
        if a < 0 <= b:
            t = a / (a - b)
            return float(math.exp(lx[i] + t * (lx[i + 1] - lx[i])))
    raise ThresholdError("curves do not cross in range; bracket the threshold")


def find_threshold(sweep: SweepResult, bootstrap: int = 1000, seed: int = 0, level: float = 0.95) -> ThresholdEstimate:
    cfg = sweep.config
    if len(cfg.distances) < 2:
        raise ValueError("need at least two distances")
    if len(cfg.values) < 4:
        raise ValueError("need at least four sweep points")
    d1, d2 = cfg.distances[-2:]
    c1, c2 = sweep.curve(d1), sweep.curve(d2)
    n1 = np.array([r.shots for r in c1])
    n2 = np.array([r.shots for r in c2])
    f1 = np.array([r.failures for r in c1])
    f2 = np.array([r.failures for r in c2])
    xs = cfg.values
    value = crossing(xs, _log_rate(f1, n1), _log_rate(f2, n2))
    rng = np.random.default_rng(seed)
    boots = []
    for _ in range(bootstrap):
        b1 = rng.binomial(n1, f1 / n1)
        b2 = rng.binomial(n2, f2 / n2)
        try:
            boots.append(crossing(xs, _log_rate(b1, n1), _log_rate(b2, n2)))
        except ThresholdError:
            continue
    if boots:
        lo, hi = np.quantile(boots, [(1 - level) / 2, (1 + level) / 2])
    else:
        lo = hi = float("nan")
    return ThresholdEstimate(cfg.param, value, float(lo), float(hi), (d1, d2))
