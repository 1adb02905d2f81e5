import numpy as np
import pytest

from tvsyn import (CausalOperator, CausalityViolationError, InvalidInputError,
                   NestStructure, PreannihilatorElement, causality_defect,
                   hs_norm, is_partial_isometry, polar_decompose,
                   spectral_norm, trace_norm)


def test_norm_examples():
    assert spectral_norm(np.zeros((3, 3))) == 0.0
    assert spectral_norm(np.eye(5)) == pytest.approx(1.0)
    assert spectral_norm([[3.0, 0.0], [0.0, 4.0]]) == pytest.approx(4.0)
    assert trace_norm(np.zeros((2, 2))) == 0.0
    assert trace_norm([[3.0, 0.0], [0.0, 4.0]]) == pytest.approx(7.0)
    u = np.array([1.0, 0.0])
    v = np.array([0.6, 0.8])
    assert trace_norm(np.outer(u, v)) == pytest.approx(1.0)
    assert hs_norm(np.eye(4)) == pytest.approx(2.0)
    assert hs_norm([[1.0, 1.0], [1.0, 1.0]]) == pytest.approx(2.0)


def test_norm_ordering_and_trace_duality():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = int(rng.integers(1, 9))
        A = rng.standard_normal((n, n))
        B = rng.standard_normal((n, n))
        assert spectral_norm(A) <= hs_norm(A) + 1e-12
        assert hs_norm(A) <= trace_norm(A) + 1e-12
        assert abs(np.trace(A @ B)) <= trace_norm(A) * spectral_norm(B) + 1e-9


def test_nonfinite_rejected():
    with pytest.raises(InvalidInputError):
        spectral_norm([[np.nan, 0.0], [0.0, 1.0]])
    with pytest.raises(InvalidInputError):
        trace_norm([[np.inf, 0.0], [0.0, 1.0]])


def test_polar_decompose():
    pp = polar_decompose(np.eye(3))
    assert np.allclose(pp.isometry_factor, np.eye(3))
    assert np.allclose(pp.positive_factor, np.eye(3))
    pp = polar_decompose(np.diag([2.0, 0.0]))
    assert np.allclose(pp.isometry_factor, np.diag([1.0, 0.0]))
    assert np.allclose(pp.positive_factor, np.diag([2.0, 0.0]))
    rng = np.random.default_rng(7)
    for n in range(1, 21):
        M = rng.standard_normal((n, n))
        pp = polar_decompose(M)
        U = pp.isometry_factor
        assert np.linalg.norm(U @ pp.positive_factor - M, 2) <= 1e-10 * spectral_norm(M)
        assert np.linalg.norm(U @ U.T @ U - U, 2) <= 1e-12


def test_is_partial_isometry():
    P = np.eye(4)[[2, 0, 3, 1]]
    ok, d = is_partial_isometry(P, 1e-12)
    assert ok and d == pytest.approx(0.0, abs=1e-14)
    ok, _ = is_partial_isometry([[0.0, 1.0], [0.0, 0.0]], 1e-10)
    assert ok
    ok, d = is_partial_isometry(np.diag([0.5, 1.0]), 1e-6)
    assert not ok and d == pytest.approx(0.5)
    with pytest.raises(InvalidInputError):
        is_partial_isometry(np.eye(2), 0.0)


def test_causality_defect():
    c, s = causality_defect([[0.0, 1.0], [0.0, 0.0]])
    assert c == pytest.approx(1.0)
    L = np.tril(np.random.default_rng(1).standard_normal((5, 5)))
    c, s = causality_defect(L)
    assert c == 0.0
    assert s >= np.abs(np.diag(L)).max() - 1e-12
    c, s = causality_defect(np.tril(L, -1))
    assert c == 0.0 and s == 0.0


def test_type_validation():
    with pytest.raises(CausalityViolationError):
        CausalOperator(np.array([[1.0, 0.5], [0.0, 1.0]]))
    with pytest.raises(CausalityViolationError):
        PreannihilatorElement(np.eye(2))
    try:
        CausalOperator(np.array([[1.0, 2.0], [0.0, 1.0]]))
    except CausalityViolationError as e:
        assert e.offending[0][:2] == (0, 1)
    T = PreannihilatorElement(np.array([[0.0, 0.0], [3.0, 0.0]]))
    assert T.trace_norm() == pytest.approx(3.0)
    with pytest.raises(InvalidInputError):
        CausalOperator(np.zeros((2, 3)))


def test_nest_structure():
    nest = NestStructure(4)
    assert np.allclose(nest.projection(0), np.zeros((4, 4)))
    assert np.allclose(nest.projection(4), np.eye(4))
    total = sum(nest.atom(k) for k in range(4))
    assert np.allclose(total, np.eye(4))
    for k in range(4):
        Pk = nest.projection(k)
        assert np.allclose(Pk @ Pk, Pk)
    with pytest.raises(InvalidInputError):
        nest.projection(5)


def test_complex_adjoint_consistency():
    rng = np.random.default_rng(9)
    M = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    assert spectral_norm(M) == pytest.approx(spectral_norm(np.conj(M).T))
    assert trace_norm(M) == pytest.approx(trace_norm(np.conj(M).T))
    pp = polar_decompose(M)
    assert np.linalg.norm(pp.isometry_factor @ pp.positive_factor - M, 2) \
        <= 1e-10 * spectral_norm(M)
