"""Mixed sensitivity synthesis for stable causal plants.

Minimizes || [W(I - P Q); V P Q] || over causal Q.  The stacked problem is
reduced to a distance problem against the isometric column R2 built from
the spectral factor of W^*W + V^*V, and the optimal value is computed
three independent ways: through the mixed Hankel-Toeplitz operator,
through the norm of the projected multiplication operator Gamma, and by a
direct convex minimization with a certified duality gap.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (AssumptionViolationError, InvalidInputError,
                     MethodDisagreementError, NotPositiveDefiniteError,
                     SolverNonConvergenceError, UndefinedCertificateError)
from .dual_program import _simplex_cap_projection
from .factorization import inner_outer, spectral_factor_causal
from .operator_core import (RANK_REL_TOL, CausalOperator, adjoint, as_matrix)
from .tv_hankel import lower_index_pairs, mixed_operator_norm


@dataclass(frozen=True)
class MixedPlant:
    W: CausalOperator
    V: CausalOperator
    P: CausalOperator
    lambda1: CausalOperator
    U1: CausalOperator
    G: CausalOperator
    R: np.ndarray        # 2N x N
    lam: CausalOperator  # outer factor of R^*R
    R2: np.ndarray       # 2N x N isometry
    omega: np.ndarray    # 2N x N

    @property
    def dim(self):
        return self.W.dim

    @property
    def R21(self):
        return self.R2[:self.dim]

    @property
    def R22(self):
        return self.R2[self.dim:]

    @property
    def T1(self):
        n = self.dim
        return np.vstack([self.W.entries, np.zeros((n, n), dtype=self.W.entries.dtype)])


@dataclass(frozen=True)
class MixedResult:
    mu_o: float
    Q: CausalOperator  # Youla parameter (un-absorbed)
    Q_absorbed: CausalOperator
    method_values: dict
    allpass_defect: float


def build_mixed_plant(W, V, P, tol=1e-8):
    """Assemble every factor of the stacked reduction.

    Requires W^*W + V^*V positive definite (closedness) and the outer
    factor G of Lambda1 P invertible (assumption on the plant).
    """
    W = W if isinstance(W, CausalOperator) else CausalOperator(as_matrix(W))
    V = V if isinstance(V, CausalOperator) else CausalOperator(as_matrix(V))
    P = P if isinstance(P, CausalOperator) else CausalOperator(as_matrix(P))
    if not (W.dim == V.dim == P.dim):
        raise InvalidInputError("build_mixed_plant: dims must agree")
    n = W.dim
    Wm, Vm, Pm = W.entries, V.entries, P.entries
    gram = adjoint(Wm) @ Wm + adjoint(Vm) @ Vm
    try:
        Lam1 = spectral_factor_causal(gram, tol=tol)
    except NotPositiveDefiniteError as e:
        raise NotPositiveDefiniteError(
            "W^*W + V^*V not positive definite (closedness fails): " + str(e),
            min_eigenvalue=e.min_eigenvalue) from e
    try:
        pair = inner_outer(CausalOperator(Lam1.entries @ Pm), tol=tol)
    except AssumptionViolationError as e:
        raise AssumptionViolationError(
            "outer factor G of Lambda1 P not invertible: " + str(e),
            assumption="A3",
            condition_number=float(np.linalg.cond(Lam1.entries @ Pm))) from e
    U1, G = pair.inner, pair.outer
    Lam1_inv = np.linalg.solve(Lam1.entries, np.eye(n))
    R = np.vstack([Wm, Vm]) @ Lam1_inv @ U1.entries
    Lam = spectral_factor_causal(adjoint(R) @ R, tol=tol)
    R2 = R @ np.linalg.solve(Lam.entries, np.eye(n))
    R21, R22 = R2[:n], R2[n:]
    omega = np.vstack([(np.eye(n) - R21 @ adjoint(R21)) @ Wm,
                       -R22 @ adjoint(R21) @ Wm])
    return MixedPlant(W=W, V=V, P=P, lambda1=Lam1, U1=U1, G=G, R=R, lam=Lam,
                      R2=R2, omega=omega)


def mixed_value_hankel_toeplitz(mp):
    """mu_o from the mixed Hankel-Toeplitz eigenvalue identity."""
    sym = adjoint(mp.R21) @ mp.W.entries
    gram = adjoint(mp.omega) @ mp.omega
    return float(np.sqrt(mixed_operator_norm(sym, gram)))


def _stacked_causal_project(R2, S):
    """Project a stacked 2N x N matrix onto R2 * (causal matrices)."""
    n = R2.shape[1]
    return R2 @ np.tril(adjoint(R2) @ S)


def mixed_value_gamma(mp):
    """Operator norm of Gamma = (I - R2 P_low R2^*) composed with
    multiplication by [W; 0], realized column-by-column on the causal
    entry basis."""
    n = mp.dim
    Wm = mp.W.entries
    pairs = lower_index_pairs(n)
    cols = []
    for (i, j) in pairs:
        E = np.zeros((n, n), dtype=Wm.dtype)
        E[i, j] = 1.0
        S = np.vstack([Wm @ E, np.zeros((n, n), dtype=Wm.dtype)])
        S = S - _stacked_causal_project(mp.R2, S)
        cols.append(S.ravel())
    Gm = np.array(cols).T
    sv = np.linalg.svd(Gm, compute_uv=False)
    return float(sv[0]) if sv.size else 0.0


def minimize_stacked_distance(T1, R2, gap_tol=1e-9, rho=1.0, max_iter=200000):
    """min over causal Q of ||T1 - R2 Q|| by ADMM with a certified gap.

    Returns (value, Q, lower_bound, iterations).  R2 must have orthonormal
    columns; the lower bound is evaluated from a dual-feasible point built
    out of the running multiplier.
    """
    T1 = np.asarray(T1)
    R2 = np.asarray(R2)
    if not (np.all(np.isfinite(T1)) and np.all(np.isfinite(R2))):
        raise InvalidInputError("minimize_stacked_distance: non-finite input")
    if T1.shape != R2.shape:
        raise InvalidInputError("minimize_stacked_distance: shapes must agree")
    n = R2.shape[1]
    if np.linalg.norm(adjoint(R2) @ R2 - np.eye(n), 2) > 1e-8:
        raise InvalidInputError("minimize_stacked_distance: R2 must be an isometry")
    Q = np.tril(adjoint(R2) @ T1)
    U = np.zeros_like(T1)
    best_ub, best_lb = np.inf, 0.0
    bestQ = Q
    for k in range(max_iter):
        Vv = T1 - R2 @ Q - U
        u, s, vt = np.linalg.svd(Vv, full_matrices=False)
        t = 1.0 / rho
        X = (u * (s - t * _simplex_cap_projection(s / t, 1.0))) @ vt
        Q = np.tril(adjoint(R2) @ (T1 - X - U))
        U = U + X - (T1 - R2 @ Q)
        if k % 25 == 0:
            ub = float(np.linalg.norm(T1 - R2 @ Q, 2))
            Phi = rho * U
            Phi = Phi - _stacked_causal_project(R2, Phi)
            nn = np.linalg.svd(Phi, compute_uv=False).sum()
            lb = 0.0 if nn == 0 else float(abs(np.sum(np.conj(Phi) * T1)) / nn)
            if ub < best_ub:
                best_ub, bestQ = ub, Q.copy()
            best_lb = max(best_lb, lb)
            if best_ub - best_lb <= gap_tol * max(best_ub, 1e-12):
                return best_ub, bestQ, best_lb, k + 1
    raise SolverNonConvergenceError(
        f"minimize_stacked_distance: gap {best_ub - best_lb:.3e} after "
        f"{max_iter} iterations", best_value=best_ub,
        residual=best_ub - best_lb, iterations=max_iter)


def mixed_synthesize(mp, gap_tol=1e-9, spread_tol=1e-4):
    """Three-way evaluation of mu_o plus recovery of the optimal Q.

    Raises MethodDisagreementError when the three values spread beyond
    spread_tol * mu_o.  The reported Q is the Youla parameter (Lambda and
    G un-absorbed); the allpass defect is that of the normalized stacked
    residual restricted to the span of its maximizing input directions.
    """
    n = mp.dim
    v_ht = mixed_value_hankel_toeplitz(mp)
    v_ga = mixed_value_gamma(mp)
    T1 = mp.T1
    v_dc, Qt, lb, iters = minimize_stacked_distance(T1, mp.R2, gap_tol=gap_tol)
    vals = {"hankel_toeplitz": v_ht, "gamma_projection": v_ga,
            "direct_convex": v_dc}
    mu_o = v_ht
    spread = max(vals.values()) - min(vals.values())
    # sqrt of an eigenvalue amplifies roundoff near zero, so degenerate
    # instances with all methods at the noise floor count as agreeing
    floor = 1e-7 * max(float(np.linalg.norm(T1, 2)), 1e-300)
    if max(vals.values()) > floor and spread > spread_tol * max(mu_o, 1e-12):
        raise MethodDisagreementError(
            f"mixed value spread {spread:.3e} exceeds {spread_tol:g} * mu_o",
            values=vals)
    Qy = np.linalg.solve(mp.G.entries, np.linalg.solve(mp.lam.entries, Qt))
    resid = T1 - mp.R2 @ Qt
    defect = _residual_isometry_defect(resid, mu_o)
    return MixedResult(mu_o=mu_o, Q=CausalOperator(_roundoff_lower(Qy)),
                       Q_absorbed=CausalOperator(_roundoff_lower(Qt)),
                       method_values=vals, allpass_defect=defect)


def _residual_isometry_defect(resid, mu_o):
    """Max deviation of the nonzero singular values of resid/mu_o from 1."""
    if mu_o <= 0:
        return 0.0
    s = np.linalg.svd(resid, compute_uv=False)
    keep = s > RANK_REL_TOL * (s[0] if s.size else 0.0)
    if not np.any(keep):
        raise UndefinedCertificateError("zero residual with positive mu_o")
    return float(np.max(np.abs(s[keep] / mu_o - 1.0)))


def _roundoff_lower(A):
    up = np.triu(A, 1)
    scale = max(np.abs(A).max(), 1e-300)
    if np.abs(up).max() <= 1e-8 * scale:
        return A - up
    return A


def lower_shift(n):
    """The truncated shift S: e_k -> e_{k+1} (matrix with ones on the first
    subdiagonal)."""
    return np.eye(n, k=-1)
