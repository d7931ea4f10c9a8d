"""Shot sampling and logical error rates.

Shots are generated in fixed-size batches.  Batch ``b`` of a run with master
seed ``s`` draws from ``Philox(SeedSequence([s, b]))``, so the sampled
shots, and therefore every count, depend only on ``(seed, shots, batch)``
and not on how many threads process the batches.
"""

from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .circuit import CircuitSchedule, build_circuit
from .decoder import MatchingDecoder
from .detectors import SECTORS, packed_detectors
from .frame import run_random, unpack
from .graph import build_decoding_graph
from .noise import NoiseModel

BATCH = 4096


def batch_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))


@dataclass
class ShotRecord:
    """One shot: detection events per sector as (round, check) and the logical flips.

    ``logical`` is ``(x, z)``: whether X errors flipped the logical-Z
    parity and whether Z errors flipped the logical-X parity.
    """

    syndrome: dict
    logical: tuple
    seed: int


def sample_batch(sched: CircuitSchedule, noise: NoiseModel, n: int, rng) -> dict:
    """``{sector: (detectors (n, n_det) bool, logical flip (n,) bool)}``."""
    res = run_random(sched, noise, n, rng)
    out = {}
    for sector, (dets, obs) in packed_detectors(sched, res).items():
        out[sector] = (unpack(dets, n).T, unpack(obs[None, :], n)[0])
    return out


def sample_shot(sched: CircuitSchedule, noise: NoiseModel, seed: int) -> ShotRecord:
    batch = sample_batch(sched, noise, 1, batch_rng(seed, 0))
    syndrome = {s: dets[0].reshape(sched.cycles + 1, -1) for s, (dets, _) in batch.items()}
    return ShotRecord(syndrome, tuple(bool(batch[s][1][0]) for s in SECTORS), seed)


@dataclass
class RateResult:
    d: int
    cycles: int
    noise: NoiseModel
    shots: int
    failures: int
    sector_failures: dict = field(default_factory=dict)
    seed: int = 0

    @property
    def rate(self) -> float:
        return self.failures / self.shots

    @property
    def stderr(self) -> float:
        r = self.rate
        return math.sqrt(r * (1 - r) / self.shots)

    def __iter__(self):
        yield self.rate
        yield self.stderr

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "cycles": self.cycles,
            "noise": self.noise.to_json(),
            "shots": self.shots,
            "failures": self.failures,
            "rate": self.rate,
            "stderr": self.stderr,
            "sector_failures": dict(self.sector_failures),
            "seed": self.seed,
        }


@lru_cache(maxsize=32)
def _decoders(d: int, cycles: int, noise: NoiseModel):
    sched = build_circuit(d, cycles)
    graphs = build_decoding_graph(sched, noise)
    return sched, graphs


def logical_error_rate(
    d: int,
    noise: NoiseModel,
    shots: int,
    seed: int = 0,
    *,
    cycles: int | None = None,
    threads: int = 1,
    batch: int = BATCH,
) -> RateResult:
    """Fraction of shots where the decoder mispredicts either logical flip."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    cycles = d if cycles is None else cycles
    sched, graphs = _decoders(d, cycles, noise)
    local = threading.local()

    def run(b: int):
        if not hasattr(local, "dec"):
            local.dec = {s: MatchingDecoder(g) for s, g in graphs.items()}
        n = min(batch, shots - b * batch)
        data = sample_batch(sched, noise, n, batch_rng(seed, b))
        fail = np.zeros(n, dtype=bool)
        per = {}
        for s in SECTORS:
            dets, obs = data[s]
            wrong = local.dec[s].decode_batch(dets) != obs
            per[s] = int(wrong.sum())
            fail |= wrong
        return int(fail.sum()), per

    n_batches = -(-shots // batch)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(run, range(n_batches)))
    else:
        results = [run(b) for b in range(n_batches)]
    failures = sum(r[0] for r in results)
    sector = {s: sum(r[1][s] for r in results) for s in SECTORS}
    return RateResult(d, cycles, noise, shots, failures, sector, seed)
