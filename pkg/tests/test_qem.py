import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loopqec.qem import (
    CopyStack,
    DenseLimitError,
    DensityOperator,
    PauliObservable,
    dephased,
    depolarized,
    hadamard_test,
    loop_operator,
    mixed_with,
    outcome_distribution,
    permutation_expectation,
    purified_expectation,
    purified_numerator,
    random_density,
    random_pauli,
    transversal_factorization_check,
)


def ghz(n):
    psi = np.zeros(1 << n)
    psi[0] = psi[-1] = 1
    return psi


instances = st.tuples(st.integers(1, 3), st.integers(1, 3), st.integers(0, 2**32 - 1))


@settings(max_examples=100, deadline=None)
@given(inst=instances)
def test_identity_chain(inst):
    N, M, seed = inst
    rng = np.random.default_rng(seed)
    rho = random_density(N, rng, rank=int(rng.integers(1, (1 << N) + 1)))
    O = random_pauli(N, rng)
    stack = CopyStack(N, M)
    num = purified_numerator(rho, O, M)
    perm = permutation_expectation(stack, rho, O)
    assert abs(num - perm) <= 1e-9
    if N * (M + 1) <= 14:
        assert abs(hadamard_test(stack, rho, O).value - perm) <= 1e-9
    assert transversal_factorization_check(stack, O)


@pytest.mark.parametrize("N, M", [(1, 2), (2, 2), (3, 3)])
def test_outcome_distribution_normalized(N, M):
    rng = np.random.default_rng(N * 10 + M)
    rho, O = random_density(N, rng), random_pauli(N, rng)
    for anc in ("ghz", "product"):
        probs = outcome_distribution(CopyStack(N, M), rho, O, anc)
        assert probs.sum() == pytest.approx(1.0) and (probs >= 0).all()


def test_product_ancillas_miss_the_identity():
    # Each loop operator is unitary but not Hermitian; independent |+>
    # ancillas measure the product of the Hermitian parts instead.
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(20):
        rho, O = random_density(2, rng), random_pauli(2, rng)
        stack = CopyStack(2, 2)
        exact = permutation_expectation(stack, rho, O)
        worst = max(worst, abs(hadamard_test(stack, rho, O, ancillas="product").value - exact))
    assert worst > 1e-3


def test_product_ancillas_fine_for_one_loop():
    rng = np.random.default_rng(4)
    rho, O = random_density(1, rng), random_pauli(1, rng)
    stack = CopyStack(1, 3)
    assert hadamard_test(stack, rho, O, ancillas="product").value == pytest.approx(
        permutation_expectation(stack, rho, O), abs=1e-12)


@pytest.mark.parametrize("fixture", [depolarized, dephased])
def test_error_suppression_order(fixture):
    psi = ghz(3)
    O = PauliObservable("XXX")
    ideal = 1.0
    for eps in (0.02, 0.04):
        rho = fixture(psi, eps)
        errs = [abs(purified_expectation(rho, O, M) - ideal) for M in (1, 2, 3)]
        assert errs[0] > errs[1] > errs[2]


def test_depolarized_scaling_eps_to_the_m():
    psi, O = ghz(2), PauliObservable("ZZ")
    for M in (1, 2, 3):
        e_small = 1 - purified_expectation(depolarized(psi, 1e-3), O, M)
        e_big = 1 - purified_expectation(depolarized(psi, 2e-3), O, M)
        assert e_big / e_small == pytest.approx(2**M, rel=0.02)


def test_orthogonal_mixture():
    psi, sigma = np.array([1, 0]), np.array([0, 1])
    rho = mixed_with(psi, sigma, 0.1)
    got = purified_expectation(rho, PauliObservable("Z"), 2)
    assert got == pytest.approx((0.81 - 0.01) / (0.81 + 0.01))
    with pytest.raises(ValueError, match="orthogonal"):
        mixed_with(psi, np.array([1, 1]), 0.1)


def test_pure_state_invariant():
    rho = DensityOperator.pure(ghz(2))
    for M in (1, 2, 3):
        assert purified_expectation(rho, PauliObservable("XX"), M) == pytest.approx(1.0)
    assert rho.purity(2) == pytest.approx(1.0)


def test_sampling_converges():
    rng = np.random.default_rng(8)
    rho, O = random_density(2, rng), PauliObservable("XZ")
    stack = CopyStack(2, 2)
    exact = hadamard_test(stack, rho, O).value
    res = hadamard_test(stack, rho, O, shots=200_000, seed=1)
    assert abs(res.value - exact) < 4 * res.stderr
    again = hadamard_test(stack, rho, O, shots=200_000, seed=1)
    assert again.value == res.value


def test_loop_operator_acts_on_its_loop_only():
    stack = CopyStack(2, 2)
    U = loop_operator(stack, PauliObservable("XY"), 1)
    assert np.allclose(U @ U.conj().T, np.eye(16))
    assert stack.loop(1) == [1, 3]


@pytest.mark.parametrize("N, M", [(4, 4), (5, 3)])
def test_dense_limit(N, M):
    with pytest.raises(DenseLimitError):
        CopyStack(N, M)


def test_hadamard_dense_limit():
    stack = CopyStack(3, 4)  # 13 register qubits fit, the 3 ancillas do not
    rng = np.random.default_rng(0)
    with pytest.raises(DenseLimitError):
        hadamard_test(stack, random_density(3, rng), random_pauli(3, rng))


@pytest.mark.parametrize("bad", [np.eye(3) / 3, np.array([[1, 1], [0, 0]]), np.diag([1.5, -0.5])])
def test_density_validation(bad):
    with pytest.raises(ValueError):
        DensityOperator(bad)


def test_vanishing_normalization():
    # A traceless matrix cannot be a state, so probe the guard directly.
    rho = DensityOperator(np.eye(2) / 2)
    object.__setattr__(rho, "matrix", np.zeros((2, 2)))
    with pytest.raises(ValueError, match="vanishing normalization"):
        purified_expectation(rho, PauliObservable("Z"), 2)


@pytest.mark.parametrize("word, phase", [("", 1), ("XQ", 1), ("X", 2)])
def test_pauli_validation(word, phase):
    with pytest.raises(ValueError):
        PauliObservable(word, phase)
