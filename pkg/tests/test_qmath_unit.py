import math

import numpy as np
import pytest

from simulator import qmath
from simulator.errors import (
    DomainError,
    ImpossibleOutcomeError,
    RegisterError,
    ValidationError,
)
from simulator.qmath import DensityMatrix, StateVector


def _bell() -> StateVector:
    return StateVector.normalized(("A", "B"), [1, 0, 0, 1])


def test_from_label_uses_msb_first_indexing() -> None:
    psi = StateVector.from_label(("A", "a", "B", "b", "e1", "e2"), "011011")
    assert psi.amplitudes[0b011011] == 1
    assert np.count_nonzero(psi.amplitudes) == 1
    assert psi.index_of("e1") == 4


def test_state_vector_validation() -> None:
    with pytest.raises(RegisterError, match="Duplicate"):
        StateVector(("A", "A"), [1, 0, 0, 0])
    with pytest.raises(ValidationError, match="normalized"):
        StateVector(("A",), [1, 1])
    with pytest.raises(ValidationError, match="amplitudes"):
        StateVector(("A",), [1, 0, 0])
    with pytest.raises(ValidationError, match="NaN"):
        StateVector(("A",), [np.nan, 0])
    with pytest.raises(RegisterError, match="Unknown qubit label 'x'"):
        _bell().index_of("x")


def test_state_vector_is_read_only() -> None:
    psi = _bell()
    with pytest.raises(ValueError):
        psi.amplitudes[0] = 0


def test_density_matrix_validation() -> None:
    with pytest.raises(ValidationError, match="Hermitian"):
        DensityMatrix(("A",), [[0.5, 0.1], [0.3, 0.5]])
    with pytest.raises(ValidationError, match="trace"):
        DensityMatrix(("A",), [[0.5, 0], [0, 0.6]])
    with pytest.raises(ValidationError, match="negative eigenvalue"):
        DensityMatrix(("A",), [[1.2, 0], [0, -0.2]])
    with pytest.raises(ValidationError, match="4x4"):
        DensityMatrix(("A", "B"), np.eye(2) / 2)


def test_kron_left_factor_is_high_bit() -> None:
    zero, one = np.array([[1], [0]]), np.array([[0], [1]])
    assert qmath.kron(zero, one).ravel().tolist() == [0, 1, 0, 0]
    with pytest.raises(ValidationError):
        qmath.kron()


def test_kron_is_associative() -> None:
    rng = np.random.default_rng(13)
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    c = rng.normal(size=(2, 1)) + 1j * rng.normal(size=(2, 1))
    left = qmath.kron(qmath.kron(a, b), c)
    assert np.allclose(left, qmath.kron(a, qmath.kron(b, c)), rtol=0, atol=1e-12)
    assert np.allclose(left, qmath.kron(a, b, c), rtol=0, atol=1e-12)


def test_embed_places_operator_on_position() -> None:
    x = np.array([[0, 1], [1, 0]])
    op = qmath.embed(x, 1, 3)
    assert op.shape == (8, 8)
    assert op[0b010, 0b000] == 1


def test_partial_trace_of_bell_state_is_maximally_mixed() -> None:
    reduced = qmath.partial_trace(_bell().density(), ["B"])
    assert reduced.register == ("A",)
    assert np.allclose(reduced.matrix, np.eye(2) / 2)


def test_partial_trace_of_product_keeps_factor() -> None:
    plus = np.array([1, 1]) / math.sqrt(2)
    psi = StateVector(("A", "B", "C"), np.kron(np.kron([1, 0], plus), [0, 1]))
    reduced = qmath.partial_trace(psi.density(), ["A", "C"])
    assert np.allclose(reduced.matrix, np.outer(plus, plus))


def test_partial_trace_errors() -> None:
    rho = _bell().density()
    with pytest.raises(RegisterError, match="every qubit"):
        qmath.partial_trace(rho, ["A", "B"])
    with pytest.raises(RegisterError, match="Unknown qubit label 'x'"):
        qmath.partial_trace(rho, ["x"])


def test_reduce_state_keeps_register_order() -> None:
    psi = StateVector.from_label(("A", "a", "B", "b", "e1", "e2"), "100101")
    reduced = qmath.reduce_state(psi, ["e2", "A", "b"])
    assert reduced.register == ("A", "b", "e2")
    assert reduced.matrix[0b111, 0b111] == pytest.approx(1.0)


def test_condition_on_bell_state() -> None:
    probability, rest = qmath.condition_on(_bell().density(), "A", 1)
    assert probability == pytest.approx(0.5)
    assert rest.register == ("B",)
    assert np.allclose(rest.matrix, [[0, 0], [0, 1]])

    product = StateVector.from_label(("A", "B"), "00").density()
    with pytest.raises(ImpossibleOutcomeError):
        qmath.condition_on(product, "A", 1)
    with pytest.raises(DomainError):
        qmath.condition_on(product, "A", 2)


def test_von_neumann_entropy_values() -> None:
    assert qmath.von_neumann_entropy(_bell().density()) == pytest.approx(0.0, abs=1e-12)
    assert qmath.von_neumann_entropy(np.eye(4) / 4) == pytest.approx(2.0)
    with pytest.raises(ValidationError, match="Hermitian"):
        qmath.von_neumann_entropy([[0.5, 1], [0, 0.5]])


def test_entropy_is_unitarily_invariant() -> None:
    rng = np.random.default_rng(17)
    for n, rank in ((1, None), (2, None), (3, 2), (3, None)):
        rho = qmath.random_density_matrix(tuple(f"q{i}" for i in range(n)), rng, rank=rank)
        u = qmath.random_unitary(2 ** n, rng)
        rotated = u @ rho.matrix @ u.conj().T
        assert qmath.von_neumann_entropy(rotated) == pytest.approx(
            qmath.von_neumann_entropy(rho), abs=1e-10
        )


@pytest.mark.parametrize(
    "p,expected",
    [(0.0, 0.0), (1.0, 0.0), (0.5, 1.0), (0.75, 0.8112781244591328)],
)
def test_binary_entropy(p: float, expected: float) -> None:
    assert qmath.binary_entropy(p) == pytest.approx(expected, abs=1e-12)


def test_binary_entropy_domain() -> None:
    with pytest.raises(DomainError, match="Probability"):
        qmath.binary_entropy(1.1)
    assert qmath.binary_entropy(1.0 + 1e-13) == 0.0


def test_fidelity_ignores_global_phase() -> None:
    psi = _bell()
    phased = StateVector(psi.register, -1j * psi.amplitudes)
    assert qmath.state_fidelity(psi, phased) == pytest.approx(1.0)
    assert qmath.equal_up_to_global_phase(psi, phased)
    other = StateVector.from_label(psi.register, "01")
    assert not qmath.equal_up_to_global_phase(psi, other)


def test_random_ensembles_are_valid() -> None:
    rng = np.random.default_rng(7)
    u = qmath.random_unitary(8, rng)
    assert np.allclose(u.conj().T @ u, np.eye(8), atol=1e-12)
    rho = qmath.random_density_matrix(("A", "B", "C"), rng, rank=2)
    assert np.linalg.matrix_rank(rho.matrix, tol=1e-10) == 2
    assert np.trace(rho.matrix).real == pytest.approx(1.0)
