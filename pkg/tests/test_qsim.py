from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qss import qsim
from qss.errors import CapExceeded, DomainError, FormatError
from qss.pauli import PauliWord
from qss.qsim import DensityMatrix, StateVector


def bell() -> StateVector:
    return StateVector((2, 2), np.array([1, 0, 0, 1]) / np.sqrt(2))


def test_state_validation():
    with pytest.raises(DomainError):
        StateVector((2,), [1, 1])
    with pytest.raises(DomainError):
        StateVector((2, 2), [1, 0])
    with pytest.raises(DomainError):
        DensityMatrix((2,), [[1, 0], [0, 1]])
    with pytest.raises(DomainError):
        DensityMatrix((2,), [[1.5, 0], [0, -0.5]])


def test_partial_trace_of_bell_is_mixed():
    for keep in ([0], [1]):
        rho = qsim.partial_trace(bell(), keep)
        assert np.allclose(rho.matrix, np.eye(2) / 2)
    assert np.allclose(qsim.partial_trace(bell(), [0, 1]).matrix, bell().density().matrix)


def test_partial_trace_orders_factors():
    a = StateVector.basis((2,), 1)
    b = StateVector.basis((3,), 2)
    psi = a.kron(b)
    assert qsim.partial_trace(psi, [1, 0]).dims == (2, 3)
    rho = qsim.partial_trace(psi.density(), [1])
    assert np.allclose(rho.matrix, np.diag([0, 0, 1]))


@settings(max_examples=30)
@given(st.integers(0, 10**6))
def test_partial_trace_composes(seed):
    rng = np.random.default_rng(seed)
    psi = StateVector.random((2, 3, 2), rng)
    two = qsim.partial_trace(psi, [0, 2])
    direct = qsim.partial_trace(psi, [2])
    nested = qsim.partial_trace(two, [1])
    assert np.allclose(direct.matrix, nested.matrix)
    assert abs(np.trace(two.matrix) - 1) < 1e-12


def test_apply_on_subset_and_expectation():
    x = PauliWord.x_type(2, [1])
    flipped = qsim.apply_on_subset(StateVector.basis((2, 2), 0), x, [1])
    assert np.allclose(flipped.amplitudes, [0, 1, 0, 0])
    zz = PauliWord.z_type(2, [1, 1])
    assert abs(qsim.expectation(bell(), zz) - 1) < 1e-12
    assert abs(qsim.expectation(bell().density(), x, [0])) < 1e-12
    with pytest.raises(DomainError):
        qsim.apply_on_subset(bell(), np.eye(2) * 2, [0])


def test_expectation_respects_operator_order():
    psi = StateVector.basis((2, 3), (1, 2))
    op = np.kron(np.diag([0, 0, 1]), np.diag([0, 1]))  # factors ordered (site 1, site 0)
    assert abs(qsim.expectation(psi.density(), op, [1, 0]) - 1) < 1e-12
    assert abs(qsim.expectation(psi, op, [1, 0]) - 1) < 1e-12


def test_apply_permutation():
    psi = StateVector.basis((3, 3), (1, 2))
    swap = np.array([(j % 3) * 3 + j // 3 for j in range(9)])
    out = qsim.apply_permutation(psi, swap, [0, 1])
    assert np.allclose(out.amplitudes, StateVector.basis((3, 3), (2, 1)).amplitudes)
    shift = np.array([1, 2, 0])
    out = qsim.apply_permutation(psi, shift, [1])
    assert np.allclose(out.amplitudes, StateVector.basis((3, 3), (1, 0)).amplitudes)
    with pytest.raises(DomainError):
        qsim.apply_permutation(psi, np.array([0, 0, 1]), [1])


def test_distances():
    zero = StateVector.basis((2,), 0)
    one = StateVector.basis((2,), 1)
    assert abs(qsim.trace_distance(zero, one) - 1) < 1e-12
    assert abs(qsim.fidelity(zero, DensityMatrix.maximally_mixed((2,))) - 0.5) < 1e-12
    assert qsim.spectrum(DensityMatrix.maximally_mixed((3,))).tolist() == pytest.approx([1 / 3] * 3)


def test_serialization_roundtrip_is_exact():
    rng = np.random.default_rng(7)
    psi = StateVector.random((3, 2), rng)
    back = qsim.loads(qsim.dumps(psi))
    assert np.array_equal(back.amplitudes, psi.amplitudes)
    rho = qsim.partial_trace(psi, [0])
    back = qsim.loads(qsim.dumps(rho))
    assert np.array_equal(back.matrix, rho.matrix)
    with pytest.raises(FormatError):
        qsim.loads('{"kind": "other"}')


def test_caps(monkeypatch):
    monkeypatch.setenv("QSS_MAX_DIM", "8")
    with pytest.raises(CapExceeded, match="QSS_MAX_DIM"):
        StateVector.basis((3, 3), 0)
    monkeypatch.delenv("QSS_MAX_DIM")
    assert qsim.vector_cap() == qsim.DEFAULT_VECTOR_CAP
