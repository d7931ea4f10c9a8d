"""Circuit-level surface-code memory experiments with MWPM decoding."""

from .circuit import CircuitSchedule, build_circuit
from .decoder import MatchingDecoder, brute_force_decode
from .graph import DecodingGraph, GraphError, build_decoding_graph, enumerate_mechanisms
from .noise import MeasConvention, NoiseModel
from .sampler import RateResult, ShotRecord, logical_error_rate, sample_shot
from .sweep import SweepConfig, ThresholdError, ThresholdEstimate, find_threshold, run_sweep

__all__ = [
    "CircuitSchedule", "build_circuit", "MatchingDecoder", "brute_force_decode", "DecodingGraph",
    "GraphError", "build_decoding_graph", "enumerate_mechanisms", "MeasConvention", "NoiseModel",
    "RateResult", "ShotRecord", "logical_error_rate", "sample_shot", "SweepConfig", "ThresholdError",
    "ThresholdEstimate", "find_threshold", "run_sweep",
]
