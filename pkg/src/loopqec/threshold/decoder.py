"""Minimum-weight perfect matching on a :class:`DecodingGraph`.

:class:`MatchingDecoder` wraps pymatching.  :func:`brute_force_decode` is a
slow exact reference used in tests: shortest paths by Dijkstra, then an
exhaustive search over pairings of the fired detectors (each may also go to
the boundary).
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .graph import BOUNDARY, DecodingGraph


class MatchingDecoder:
    def __init__(self, graph: DecodingGraph):
        self.graph = graph
        self.n = graph.n_detectors
        self.matching = graph.to_matching() if graph.edges else None

    def decode_batch(self, syndromes: np.ndarray) -> np.ndarray:
        """(shots, n_detectors) bool -> predicted logical flip per shot."""
        shots = syndromes.shape[0]
        if self.matching is None:
            if syndromes.any():
                raise ValueError("detection events on a graph with no edges")
            return np.zeros(shots, dtype=bool)
        width = self.matching.num_detectors
        if syndromes[:, width:].any():
            raise ValueError("detection event on a detector with no edges")
        syn = np.ascontiguousarray(syndromes[:, :width], dtype=np.uint8)
        pred = self.matching.decode_batch(syn)
        if pred.shape[1] == 0:
            # No edge carries the logical: nothing can flip it.
            return np.zeros(shots, dtype=bool)
        return pred[:, 0].astype(bool)

    def decode_with_weight(self, syndrome: np.ndarray) -> tuple[bool, float]:
        width = self.matching.num_detectors
        pred, w = self.matching.decode(np.asarray(syndrome[:width], dtype=np.uint8), return_weight=True)
        return bool(pred[0]) if len(pred) else False, float(w)


def _distance_table(graph: DecodingGraph):
    """All-pairs shortest distance and path parity; node ``n`` is the boundary."""
    n = graph.n_detectors
    rows, cols, w, lab = [], [], [], {}
    for key in graph.edges:
        u, v = key
        v = n if v == BOUNDARY else v
        wt = graph.weight(key)
        rows += [u, v]
        cols += [v, u]
        w += [wt, wt]
        lab[(u, v)] = lab[(v, u)] = graph.label(key)
    mat = csr_matrix((w, (rows, cols)), shape=(n + 1, n + 1))
    dist, pred = dijkstra(mat, directed=False, return_predecessors=True)
    return dist, pred, lab


def brute_force_decode(graph: DecodingGraph, fired) -> tuple[bool, float]:
    """Exact MWPM by enumeration; only for a handful of fired detectors."""
    dist, pred, lab = _distance_table(graph)
    n = graph.n_detectors
    fired = tuple(sorted(int(f) for f in fired))

    def parity(src, dst):
        p, node = False, dst
        while node != src:
            prev = pred[src, node]
            p ^= lab[(prev, node)]
            node = prev
        return p

    @lru_cache(maxsize=None)
    def best(rest: tuple) -> tuple[float, bool]:
        if not rest:
            return 0.0, False
        a, others = rest[0], rest[1:]
        cands = []
        if math.isfinite(dist[a, n]):
            w, p = best(others)
            cands.append((dist[a, n] + w, p ^ parity(a, n)))
        for j, b in enumerate(others):
            if math.isfinite(dist[a, b]):
                w, p = best(others[:j] + others[j + 1:])
                cands.append((dist[a, b] + w, p ^ parity(a, b)))
        if not cands:
            return math.inf, False
        return min(cands, key=lambda t: t[0])

    w, p = best(fired)
    return p, w
