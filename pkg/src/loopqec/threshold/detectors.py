"""Detection events and logical flips from frame results.

Sector ``"x"`` holds the Z checks, which see X errors, and the logical-Z
parity (a flipped Z memory).  Sector ``"z"`` holds the X checks and the
logical-X parity.  Detector ``t * n_checks + i`` compares check ``i`` in
round ``t`` with round ``t - 1``; round ``cycles`` is the noiseless final
readout computed from the data frame.
"""

from __future__ import annotations

import numpy as np

from .frame import FrameResult

SECTORS = ("x", "z")


def _neighbour_table(layout, checks) -> np.ndarray:
    # Padded with -1 for weight-3 boundary checks.
    tab = -np.ones((len(checks), 4), dtype=np.int64)
    for i, a in enumerate(checks):
        s = layout.support(a)
        tab[i, : len(s)] = s
    return tab


def _parity(frame: np.ndarray, rows: np.ndarray) -> np.ndarray:
    return np.bitwise_xor.reduce(frame[rows], axis=0)


def packed_detectors(sched, res: FrameResult) -> dict:
    """``{sector: (detectors (n_det, words), observable (words,))}``."""
    lay = sched.layout
    out = {}
    for sector in SECTORS:
        checks = lay.z_checks if sector == "x" else lay.x_checks
        frame = res.X if sector == "x" else res.Z
        logical = lay.logical_z if sector == "x" else lay.logical_x
        kind = "z" if sector == "x" else "x"
        recs = [res.records[i] for i, (k, _) in enumerate(sched.records) if k == kind]
        tab = _neighbour_table(lay, checks)
        padded = np.concatenate([frame, np.zeros((1, frame.shape[1]), dtype=frame.dtype)])
        final = np.bitwise_xor.reduce(padded[tab], axis=1)
        rounds = recs + [final]
        dets = [rounds[0]] + [rounds[t] ^ rounds[t - 1] for t in range(1, len(rounds))]
        out[sector] = (np.concatenate(dets, axis=0), _parity(frame, logical))
    return out
