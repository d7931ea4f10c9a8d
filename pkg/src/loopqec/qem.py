"""Dense checks of purification-based error mitigation.

Copies are stored copy-major: qubit ``i`` of copy ``j`` is tensor factor
``j * N + i``.  Loop ``i`` holds qubit ``i`` of every copy, so the
measurement on loop ``i`` only touches factors ``i, N + i, 2N + i, ...``.
The cyclic shift moves the state of copy ``j`` into copy ``j + 1 (mod M)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

DENSE_LIMIT = 14
_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class DenseLimitError(ValueError):
    pass


def _kron(mats) -> np.ndarray:
    return reduce(np.kron, mats, np.eye(1, dtype=complex))


@dataclass(frozen=True)
class DensityOperator:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        dim = m.shape[0]
        if m.shape != (dim, dim) or dim & (dim - 1):
            raise ValueError("density operator must be square with power-of-two dimension")
        if not np.allclose(m, m.conj().T, atol=1e-10):
            raise ValueError("density operator must be Hermitian")
        if abs(np.trace(m) - 1) > 1e-10:
            raise ValueError("density operator must have unit trace")
        if np.linalg.eigvalsh(m).min() < -1e-10:
            raise ValueError("density operator must be positive semidefinite")

    @property
    def n_qubits(self) -> int:
        return self.matrix.shape[0].bit_length() - 1

    @classmethod
    def pure(cls, psi) -> "DensityOperator":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    def purity(self, M: int = 2) -> float:
        return float(np.real(np.trace(np.linalg.matrix_power(self.matrix, M))))


@dataclass(frozen=True)
class PauliObservable:
    word: str
    phase: int = 1

    def __post_init__(self):
        if not self.word or set(self.word) - set("IXYZ"):
            raise ValueError(f"bad Pauli word {self.word!r}")
        if self.phase not in (1, -1):
            raise ValueError("phase must be +1 or -1")

    @property
    def n_qubits(self) -> int:
        return len(self.word)

    def letter(self, i: int) -> np.ndarray:
        return _PAULI[self.word[i]]

    def matrix(self) -> np.ndarray:
        return self.phase * _kron(_PAULI[c] for c in self.word)


@dataclass(frozen=True)
class CopyStack:
    N: int
    M: int

    def __post_init__(self):
        if self.N < 1 or self.M < 1:
            raise ValueError("N and M must be >= 1")
        if self.N * self.M + 1 > DENSE_LIMIT:
            raise DenseLimitError(f"N*M + 1 = {self.N * self.M + 1} exceeds the dense limit {DENSE_LIMIT}")

    @property
    def n_qubits(self) -> int:
        return self.N * self.M

    def loop(self, i: int) -> list[int]:
        """Tensor factors held by loop ``i``."""
        return [j * self.N + i for j in range(self.M)]

    def cyclic_shift(self) -> np.ndarray:
        """Full-register operator moving copy j to copy j+1."""
        N, M = self.N, self.M
        return _permutation([((j + 1) % M) * N + i for j in range(M) for i in range(N)])

    def loop_shift(self, i: int) -> np.ndarray:
        """The same shift restricted to loop ``i``, as a full-register operator."""
        N, M = self.N, self.M
        dest = list(range(N * M))
        for j in range(M):
            dest[j * N + i] = ((j + 1) % M) * N + i
        return _permutation(dest)

    def on_factor(self, op: np.ndarray, factor: int) -> np.ndarray:
        n = self.n_qubits
        return _kron([op if k == factor else _PAULI["I"] for k in range(n)])


def _permutation(dest: list[int]) -> np.ndarray:
    """Operator sending tensor factor ``k`` to position ``dest[k]``."""
    n = len(dest)
    idx = np.arange(1 << n)
    bits = (idx[:, None] >> (n - 1 - np.arange(n))) & 1
    out_bits = np.empty_like(bits)
    out_bits[:, dest] = bits
    target = (out_bits << (n - 1 - np.arange(n))).sum(axis=1)
    P = np.zeros((1 << n, 1 << n), dtype=complex)
    P[target, idx] = 1
    return P


def purified_expectation(rho: DensityOperator, O: PauliObservable, M: int) -> float:
    if M < 1:
        raise ValueError("M must be >= 1")
    power = np.linalg.matrix_power(rho.matrix, M)
    norm = np.real(np.trace(power))
    if norm < 1e-12:
        raise ValueError("vanishing normalization")
    return float(np.real(np.trace(O.matrix() @ power)) / norm)


def purified_numerator(rho: DensityOperator, O: PauliObservable, M: int) -> float:
    return float(np.real(np.trace(O.matrix() @ np.linalg.matrix_power(rho.matrix, M))))


def _check(stack: CopyStack, rho: DensityOperator, O: PauliObservable | None = None):
    if rho.n_qubits != stack.N or (O is not None and O.n_qubits != stack.N):
        raise ValueError("state and observable must act on N qubits")


def _copies(stack: CopyStack, rho: DensityOperator) -> np.ndarray:
    return _kron([rho.matrix] * stack.M)


def permutation_expectation(stack: CopyStack, rho: DensityOperator, O: PauliObservable) -> float:
    """Tr(O on copy 1 times the cyclic shift, against M copies of rho)."""
    _check(stack, rho, O)
    first = _kron([O.matrix()] + [np.eye(1 << stack.N)] * (stack.M - 1))
    return float(np.real(np.trace(first @ stack.cyclic_shift() @ _copies(stack, rho))))


def loop_operator(stack: CopyStack, O: PauliObservable, i: int) -> np.ndarray:
    """G_i on copy 1 of loop i followed by that loop's cyclic shift."""
    G = stack.on_factor(O.letter(i), i)
    if i == 0:
        G = O.phase * G
    return G @ stack.loop_shift(i)


def transversal_factorization_check(stack: CopyStack, O: PauliObservable, atol: float = 1e-12) -> bool:
    """Whether the global operator equals the product of the per-loop operators."""
    if O.n_qubits != stack.N:
        raise ValueError("observable must act on N qubits")
    first = _kron([O.matrix()] + [np.eye(1 << stack.N)] * (stack.M - 1))
    glob = first @ stack.cyclic_shift()
    prod = reduce(np.matmul, (loop_operator(stack, O, i) for i in range(stack.N)))
    return bool(np.allclose(glob, prod, atol=atol))


@dataclass
class HadamardTestResult:
    value: float
    stderr: float = 0.0
    shots: int | None = None


def _branch_traces(stack: CopyStack, rho: DensityOperator, O: PauliObservable, branches: list) -> dict:
    """Tr(U^a Sigma U^b†) for every pair of the given ancilla branches."""
    N = stack.N
    sigma = _copies(stack, rho)
    U = [loop_operator(stack, O, i) for i in range(N)]
    ident = np.eye(sigma.shape[0], dtype=complex)
    branch = {}
    for a in branches:
        branch[a] = reduce(np.matmul, (U[i] if a >> i & 1 else ident for i in range(N)))
    left = {a: branch[a] @ sigma for a in branch}
    return {(a, b): np.trace(left[a] @ branch[b].conj().T) for a in branch for b in branch}


ANCILLA_STATES = ("ghz", "product")


def _ancilla_amplitudes(N: int, ancillas: str) -> dict:
    if ancillas == "product":
        return {a: 2 ** (-N / 2) for a in range(1 << N)}
    if ancillas == "ghz":
        return {0: 2**-0.5, (1 << N) - 1: 2**-0.5} if N > 0 else {0: 1.0}
    raise ValueError(f"ancillas must be one of {ANCILLA_STATES}")


def outcome_distribution(stack: CopyStack, rho: DensityOperator, O: PauliObservable, ancillas: str = "ghz") -> np.ndarray:
    """Probability of each ancilla X-outcome pattern (bit i set means -1 on ancilla i)."""
    N = stack.N
    amp = _ancilla_amplitudes(N, ancillas)
    traces = _branch_traces(stack, rho, O, list(amp))
    probs = np.zeros(1 << N)
    for s in range(1 << N):
        acc = 0j
        for (a, b), t in traces.items():
            sign = (-1) ** bin(s & (a ^ b)).count("1")
            acc += amp[a] * np.conj(amp[b]) * sign * t
        probs[s] = np.real(acc) / 2**N
    return np.clip(probs, 0, None)


def hadamard_test(
    stack: CopyStack,
    rho: DensityOperator,
    O: PauliObservable,
    shots: int | None = None,
    seed: int = 0,
    ancillas: str = "ghz",
) -> HadamardTestResult:
    """Expected product of the N ancilla X outcomes of the per-loop circuits.

    Loop ``i`` applies (G_i then the loop shift) controlled on its own
    ancilla, which is then measured in the X basis.  With ``ancillas="ghz"``
    the N ancillas start in (|0...0> + |1...1>)/sqrt(2), so the product of
    outcomes estimates Re Tr(O C rho^M) exactly.  ``"product"`` starts every
    ancilla in |+>; the product then estimates the expectation of the tensor
    product of the Hermitian parts (U_i + U_i^dagger)/2, which differs once
    N >= 2 and M >= 2.

    Exact mode returns the expectation; with ``shots`` outcomes are sampled.
    """
    _check(stack, rho, O)
    if stack.N * (stack.M + 1) > DENSE_LIMIT:
        raise DenseLimitError("N*(M+1) exceeds the dense limit")
    probs = outcome_distribution(stack, rho, O, ancillas)
    parity = np.array([(-1) ** bin(s).count("1") for s in range(len(probs))])
    exact = float(parity @ probs)
    if shots is None:
        return HadamardTestResult(exact)
    rng = np.random.default_rng(seed)
    draws = parity[rng.choice(len(probs), size=shots, p=probs / probs.sum())]
    err = float(draws.std(ddof=1) / np.sqrt(shots)) if shots > 1 else 0.0
    return HadamardTestResult(float(draws.mean()), err, shots)


# Noisy-state fixtures.


def depolarized(psi, eps: float) -> DensityOperator:
    pure = DensityOperator.pure(psi).matrix
    dim = pure.shape[0]
    return DensityOperator((1 - eps) * pure + eps * np.eye(dim) / dim)


def dephased(psi, eps: float) -> DensityOperator:
    """Independent Z flips with probability ``eps`` on every qubit."""
    m = DensityOperator.pure(psi).matrix
    n = m.shape[0].bit_length() - 1
    for q in range(n):
        Zq = _kron([_PAULI["Z"] if k == q else _PAULI["I"] for k in range(n)])
        m = (1 - eps) * m + eps * Zq @ m @ Zq
    return DensityOperator(m)


def mixed_with(psi, sigma, eps: float) -> DensityOperator:
    """(1 - eps)|psi><psi| + eps |sigma><sigma| for an orthogonal pure sigma."""
    a = DensityOperator.pure(psi).matrix
    b = DensityOperator.pure(sigma).matrix
    if abs(np.trace(a @ b)) > 1e-10:
        raise ValueError("sigma must be orthogonal to psi")
    return DensityOperator((1 - eps) * a + eps * b)


def random_density(n: int, rng: np.random.Generator, rank: int | None = None) -> DensityOperator:
    dim = 1 << n
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return DensityOperator(m / np.trace(m))


def random_pauli(n: int, rng: np.random.Generator) -> PauliObservable:
    return PauliObservable("".join(rng.choice(list("IXYZ"), size=n)), int(rng.choice([1, -1])))
