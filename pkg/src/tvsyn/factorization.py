"""Causal spectral factorization and inner-outer splittings.

The outer factor of a positive definite matrix M is the unique lower
triangular Lam with positive diagonal satisfying Lam^* Lam = M.  It is
computed by an "anti-Cholesky": Cholesky of the index-reversed matrix,
then reversal.  Inner-outer and outer-inner factorizations of causal
operators reduce to it.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (AssumptionViolationError, InvalidInputError,
                     NotPositiveDefiniteError)
from .operator_core import CausalOperator, adjoint, as_matrix


@dataclass(frozen=True)
class InnerOuterPair:
    inner: CausalOperator
    outer: CausalOperator
    order: str  # "inner_first" (T = inner @ outer) or "outer_first"

    def product(self):
        if self.order == "inner_first":
            return self.inner.entries @ self.outer.entries
        return self.outer.entries @ self.inner.entries


@dataclass(frozen=True)
class A1Report:
    passed: bool
    t2_condition: float
    t3_condition: float
    failures: tuple


def _reversal(n):
    return np.eye(n)[::-1]


def spectral_factor_causal(M, tol=1e-10):
    """Lower-triangular Lam with positive diagonal, Lam^* Lam = M.

    M must be Hermitian with smallest eigenvalue >= tol * ||M||; otherwise
    NotPositiveDefiniteError carries the offending eigenvalue.
    """
    A = as_matrix(M, "spectral_factor_causal input")
    nrm = float(np.linalg.norm(A, 2))
    if nrm > 0 and np.linalg.norm(A - adjoint(A), 2) > 1e-10 * nrm:
        raise InvalidInputError("spectral_factor_causal input is not Hermitian")
    A = 0.5 * (A + adjoint(A))
    w = np.linalg.eigvalsh(A)
    if w[0] < tol * max(nrm, 1e-300):
        raise NotPositiveDefiniteError(
            f"matrix not positive definite at tolerance {tol:g}: "
            f"min eigenvalue {w[0]:.3e}", min_eigenvalue=float(w[0]))
    n = A.shape[0]
    J = _reversal(n)
    L = np.linalg.cholesky(J @ A @ J)
    Lam = J @ adjoint(L) @ J
    # Cholesky already gives positive diagonal; reversal preserves it.
    return CausalOperator(Lam)


def inner_outer(T, tol=1e-10):
    """T = T_i T_o with T_i^* T_i = I and T_o outer (invertible causal)."""
    A = T.entries if isinstance(T, CausalOperator) else CausalOperator(as_matrix(T)).entries
    try:
        To = spectral_factor_causal(adjoint(A) @ A, tol=tol)
    except NotPositiveDefiniteError as e:
        raise AssumptionViolationError(
            "inner_outer: T^*T not invertible (assumption on outer factors fails): "
            + str(e), assumption="A1") from e
    # T_i = T @ To^{-1}, via triangular solve on the adjoint system
    Ti = np.linalg.solve(adjoint(To.entries), adjoint(A))
    Ti = adjoint(Ti)
    return InnerOuterPair(inner=CausalOperator(_clean_lower(Ti)),
                          outer=To, order="inner_first")


def outer_inner(T, tol=1e-10):
    """T = T_o T_i with T_i T_i^* = I (co-isometry).

    Implemented as the flip-adjoint transform of inner_outer: the map
    X -> J X^* J preserves lower-triangularity and swaps the two orders.
    """
    A = T.entries if isinstance(T, CausalOperator) else CausalOperator(as_matrix(T)).entries
    n = A.shape[0]
    J = _reversal(n)
    F = J @ adjoint(A) @ J
    try:
        pair = inner_outer(CausalOperator(_clean_lower(F)), tol=tol)
    except AssumptionViolationError as e:
        raise AssumptionViolationError(
            "outer_inner: T T^* not invertible: " + str(e),
            assumption="A1") from e
    To = CausalOperator(_clean_lower(J @ adjoint(pair.outer.entries) @ J))
    Ti = CausalOperator(_clean_lower(J @ adjoint(pair.inner.entries) @ J))
    return InnerOuterPair(inner=Ti, outer=To, order="outer_first")


def check_A1(T2, T3, tol=1e-10):
    """Report whether both outer factors exist and are invertible."""
    failures = []
    conds = []
    for name, T in (("T2", T2), ("T3", T3)):
        try:
            pair = inner_outer(T, tol=tol) if name == "T2" else outer_inner(T, tol=tol)
            conds.append(float(np.linalg.cond(pair.outer.entries)))
        except (AssumptionViolationError, NotPositiveDefiniteError) as e:
            conds.append(float("inf"))
            failures.append(f"{name}: {e}")
    return A1Report(passed=not failures, t2_condition=conds[0],
                    t3_condition=conds[1], failures=tuple(failures))


def _clean_lower(A):
    """Zero out roundoff above the diagonal so constructors accept the
    result; raises via CausalOperator if the residue is not roundoff."""
    n = A.shape[0]
    up = np.triu(A, 1)
    scale = max(np.abs(A).max(), 1e-300)
    if np.abs(up).max() > 1e-8 * scale:
        # genuinely non-causal: let the constructor report it
        return A
    return A - up
