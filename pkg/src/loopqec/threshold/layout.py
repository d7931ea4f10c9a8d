"""Unrotated planar surface-code layout on a (2d-1) x (2d-1) grid."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Grid offsets (dr, dc) of the four neighbours of a check.
_N, _E, _S, _W = (-1, 0), (0, 1), (1, 0), (0, -1)

# CZ order around each check.  X checks visit NW, NE, SE, SW of the
# loop, which lands on the N, E, S, W data qubits; Z checks start one corner
# later (NE, SE, SW, NW -> E, S, W, N).  Hook errors then run diagonally and
# never along a logical operator.
X_ORDER = (_N, _E, _S, _W)
Z_ORDER = (_E, _S, _W, _N)


@dataclass
class SurfaceLayout:
    """Qubit indices and check supports of a distance-``d`` planar code.

    Data qubits sit where ``r + c`` is even.  Z checks sit at odd rows
    (even columns) and X checks at even rows (odd columns).  The logical
    Z operator runs along the top row and the logical X operator down the
    left column.
    """

    d: int
    coords: list[tuple[int, int]] = field(init=False)
    data: np.ndarray = field(init=False)
    x_checks: np.ndarray = field(init=False)
    z_checks: np.ndarray = field(init=False)

    def __post_init__(self):
        d = self.d
        if d < 3 or d % 2 == 0:
            raise ValueError("distance must be odd and >= 3")
        L = 2 * d - 1
        self.size = L
        data, xc, zc = [], [], []
        for r in range(L):
            for c in range(L):
                if (r + c) % 2 == 0:
                    data.append((r, c))
                elif r % 2 == 1:
                    zc.append((r, c))
                else:
                    xc.append((r, c))
        self.coords = data + xc + zc
        self.index = {rc: i for i, rc in enumerate(self.coords)}
        nd, nx = len(data), len(xc)
        self.data = np.arange(nd)
        self.x_checks = np.arange(nd, nd + nx)
        self.z_checks = np.arange(nd + nx, len(self.coords))
        self.n_qubits = len(self.coords)

    def neighbour(self, q: int, step: tuple[int, int]) -> int | None:
        r, c = self.coords[q]
        return self.index.get((r + step[0], c + step[1]))

    def check_layers(self, checks: np.ndarray, order) -> list[tuple[np.ndarray, np.ndarray]]:
        """(ancilla, data) index pairs for each of the four CZ layers."""
        layers = []
        for step in order:
            pairs = [(a, self.neighbour(a, step)) for a in checks]
            pairs = [(a, b) for a, b in pairs if b is not None]
            a, b = zip(*pairs) if pairs else ((), ())
            layers.append((np.array(a, dtype=np.int64), np.array(b, dtype=np.int64)))
        return layers

    def support(self, check: int) -> list[int]:
        out = [self.neighbour(check, s) for s in (_N, _E, _S, _W)]
        return [q for q in out if q is not None]

    def support_matrix(self, checks: np.ndarray) -> np.ndarray:
        """Boolean (n_checks, n_data) incidence matrix."""
        m = np.zeros((len(checks), len(self.data)), dtype=bool)
        for i, a in enumerate(checks):
            m[i, self.support(a)] = True
        return m

    @property
    def logical_z(self) -> np.ndarray:
        """Data qubits of the top row; detects logical X flips."""
        return np.array([self.index[(0, c)] for c in range(0, self.size, 2)])

    @property
    def logical_x(self) -> np.ndarray:
        """Data qubits of the left column; detects logical Z flips."""
        return np.array([self.index[(r, 0)] for r in range(0, self.size, 2)])
