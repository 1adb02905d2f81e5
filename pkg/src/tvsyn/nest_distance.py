"""Primal distance problem on the nest of coordinate truncations.

Reduces the closed-loop optimization to the distance from a symbol B to
the causal (lower-triangular) matrices, evaluates the distance through
corner-block norms, recovers an optimal causal Q by sequential completion
along anti-diagonals, and certifies optimality through the dual witness
and the allpass property of the residual.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import dual_program
from .errors import (AssumptionViolationError, CompletionInfeasibleError,
                     FeedbackIllPosedError, InvalidInputError,
                     UndefinedCertificateError)
from .factorization import InnerOuterPair, inner_outer, outer_inner
from .operator_core import (RANK_REL_TOL, CausalOperator,
                            PreannihilatorElement, adjoint, as_matrix,
                            corner_block_norms)


@dataclass(frozen=True)
class FactoredPlant:
    T1: CausalOperator
    T2: CausalOperator
    T3: CausalOperator
    t2_factors: Optional[InnerOuterPair]
    t3_factors: Optional[InnerOuterPair]
    symbol_B: np.ndarray
    t2o_inv: Optional[np.ndarray]  # for un-absorbing the outer factors
    t3o_inv: Optional[np.ndarray]

    @property
    def dim(self):
        return self.T1.dim


@dataclass(frozen=True)
class SynthesisOptions:
    tol: float = 1e-8
    gap_tol: float = 1e-6
    truncation: Optional[int] = None  # defaults to the ambient dim
    run_dual_solve: bool = False
    dual_max_iter: int = 5000
    dual_tol: float = 1e-4


@dataclass(frozen=True)
class SynthesisResult:
    mu_primal: float
    mu_dual: float
    gap: float
    Q: CausalOperator
    Q_youla: CausalOperator
    T_dual: Optional[PreannihilatorElement]
    allpass_defect: float
    argmax_level: int
    method_tags: tuple
    warning: Optional[str] = None
    sdp_certificate: object = None


def reduce_to_distance(T1, T2, T3, tol=1e-10):
    """Absorb the outer factors: B = T2i^* T1 T3i^* with Qtilde = T2o Q T3o."""
    T1 = T1 if isinstance(T1, CausalOperator) else CausalOperator(as_matrix(T1))
    T2 = T2 if isinstance(T2, CausalOperator) else CausalOperator(as_matrix(T2))
    T3 = T3 if isinstance(T3, CausalOperator) else CausalOperator(as_matrix(T3))
    if not (T1.dim == T2.dim == T3.dim):
        raise InvalidInputError("reduce_to_distance: dims must agree")
    try:
        f2 = inner_outer(T2, tol=tol)
        f3 = outer_inner(T3, tol=tol)
    except AssumptionViolationError:
        raise
    B = adjoint(f2.inner.entries) @ T1.entries @ adjoint(f3.inner.entries)
    I = np.eye(T1.dim)
    t2o_inv = np.linalg.solve(f2.outer.entries, I)
    t3o_inv = np.linalg.solve(f3.outer.entries, I)
    return FactoredPlant(T1=T1, T2=T2, T3=T3, t2_factors=f2, t3_factors=f3,
                         symbol_B=B, t2o_inv=t2o_inv, t3o_inv=t3o_inv)


def plant_from_symbol(B):
    """Wrap a raw (possibly non-causal) symbol as a plant with identity
    weights; the synthesized Q is then the Youla parameter itself."""
    A = as_matrix(B)
    n = A.shape[0]
    I = CausalOperator.identity(n)
    return FactoredPlant(T1=I, T2=I, T3=I, t2_factors=None, t3_factors=None,
                         symbol_B=A, t2o_inv=np.eye(n), t3o_inv=np.eye(n))


def arveson_distance(B, upto=None):
    """(mu, level): mu = max_{1 <= n <= upto} ||P_n B (I-P_n)||, level the
    smallest maximizing n."""
    A = as_matrix(B)
    N = A.shape[0]
    upto = N if upto is None else int(upto)
    if not 1 <= upto <= N:
        raise InvalidInputError(f"upto {upto} outside [1, {N}]")
    v = corner_block_norms(A)[:upto]
    lev = int(np.argmax(v)) + 1
    return float(v[lev - 1]), lev


def restricted_distance(B, n):
    """Distance from the ambient M x M symbol B to causal matrices
    supported on the leading n x n block.

    Equals the max over 0 <= k <= n of the norm of the block on rows
    (0..k-1) union (n..M-1) and columns k..M-1: the usual corner augmented
    by the rows the restricted Q cannot touch.  At n = M this reduces to
    the corner formula.  Returns (mu, level) with level the smallest
    maximizing k.
    """
    A = as_matrix(B)
    M = A.shape[0]
    n = int(n)
    if not 1 <= n <= M:
        raise InvalidInputError(f"truncation {n} outside [1, {M}]")
    best, lev = -1.0, 0
    for k in range(n + 1):
        rows = list(range(k)) + list(range(n, M))
        blk = A[np.ix_(rows, range(k, M))]
        v = float(np.linalg.norm(blk, 2)) if blk.size else 0.0
        if v > best:
            best, lev = v, k
    return max(best, 0.0), lev


def parrott_complete(B, mu, tol=1e-9, support=None):
    """Optimal causal completion at level mu by sequential one-step
    extensions.

    Unknown (lower-triangular) residual entries are filled one
    anti-diagonal at a time; each entry solves the 2x2 block problem
    min_X ||[A b; c X]|| <= mu with the central choice
    X = -c A^* (mu^2 I - A A^*)^+ b.  ``support`` restricts Q to its
    leading block while the residual norm is ambient.
    """
    A = as_matrix(B)
    M = A.shape[0]
    nsup = M if support is None else int(support)
    if not 1 <= nsup <= M:
        raise InvalidInputError(f"support {nsup} outside [1, {M}]")
    if mu < 0:
        raise InvalidInputError("parrott_complete: mu must be nonnegative")
    lower_bound, _ = restricted_distance(A, nsup)
    if mu < lower_bound - tol:
        raise CompletionInfeasibleError(
            f"target level {mu:.6e} below the distance {lower_bound:.6e}")
    if lower_bound == 0.0:
        Q = np.zeros((nsup, nsup), dtype=A.dtype)
        Q[:, :] = np.tril(A[:nsup, :nsup])
        return CausalOperator(Q)
    R = A.astype(np.result_type(A.dtype, np.float64)).copy()
    mask = np.zeros((M, M), dtype=bool)
    for i in range(nsup):
        mask[i, :i + 1] = True
    mu2 = mu * mu
    for d in range(nsup):
        for i in range(d, nsup):
            j = i - d
            rows = list(range(i)) + list(range(nsup, M))
            Ak = R[np.ix_(rows, range(j + 1, M))]
            ck = R[i, j + 1:]
            bk = R[np.ix_(rows, [j])][:, 0]
            if Ak.size == 0:
                X = 0.0
            else:
                G = mu2 * np.eye(Ak.shape[0]) - Ak @ adjoint(Ak)
                X = -ck @ adjoint(Ak) @ np.linalg.pinv(G, rcond=RANK_REL_TOL) @ bk
            R[i, j] = X
    res = float(np.linalg.norm(R, 2))
    if res > mu + 10 * tol:
        raise CompletionInfeasibleError(
            f"completion residual {res:.6e} exceeds level {mu:.6e} + 10*tol")
    Q = np.zeros((nsup, nsup), dtype=R.dtype)
    Q[mask[:nsup, :nsup]] = (A - R)[:nsup, :nsup][mask[:nsup, :nsup]]
    return CausalOperator(Q)


def allpass_defect(B, Q, T_dual, mu, tol=1e-8):
    """Isometry defect of (B - Q)/mu on the range of the dual witness.

    Returns max over an orthonormal basis {v} of range(T_dual) of
    | ||(B-Q) v|| - mu | / mu.
    """
    if mu <= 0:
        raise InvalidInputError("allpass_defect: mu must be positive")
    A = as_matrix(B)
    Qm = Q.entries if hasattr(Q, "entries") else as_matrix(Q)
    Tm = T_dual.entries if hasattr(T_dual, "entries") else as_matrix(T_dual)
    if Qm.shape[0] < A.shape[0]:
        Qe = np.zeros_like(A)
        Qe[:Qm.shape[0], :Qm.shape[1]] = Qm
        Qm = Qe
    u, s, _ = np.linalg.svd(Tm)
    if s.size == 0 or s[0] <= RANK_REL_TOL * max(np.abs(A).max(), 1e-300):
        raise UndefinedCertificateError("allpass_defect: T_dual numerically zero")
    # witnesses inherit O(completion inflation) noise, so the range basis
    # is cut at the caller's tolerance rather than the global rank policy
    r = int(np.sum(s > max(tol, RANK_REL_TOL) * s[0]))
    basis = u[:, :r]
    gains = np.linalg.norm((A - Qm) @ basis, axis=0)
    return float(np.max(np.abs(gains - mu)) / mu)


def synthesize(plant, opts=None):
    """Full primal/dual synthesis on a factored plant.

    Computes the two-sided distance bounds at the requested truncation,
    an optimal restricted Q by sequential completion, a dual witness with
    its alignment, the allpass defect of the residual, and the un-absorbed
    Youla parameter.
    """
    opts = opts or SynthesisOptions()
    B = plant.symbol_B
    M = B.shape[0]
    N = M if opts.truncation is None else int(opts.truncation)
    if not 1 <= N <= M:
        raise InvalidInputError(f"truncation {N} outside [1, {M}]")
    tags = ["primal:corner-restricted", "completion:dkw-central"]
    mu_primal, level = restricted_distance(B, N)
    mu_dual = dual_program.dual_value_closed_form(B[:N, :N])
    gap = mu_primal - mu_dual

    if mu_primal == 0.0:
        Q = CausalOperator(np.tril(B[:N, :N]))
    else:
        # slight inflation keeps the boundary pseudo-inverses tame
        Q = parrott_complete(B, mu_primal * (1 + 1e-9), tol=opts.tol, support=N)

    Qe = np.zeros_like(B)
    Qe[:N, :N] = Q.entries
    T_dual = None
    defect = float("nan")
    if mu_primal > 0.0:
        cand = dual_program.recover_T_o(B, Qe, tol=1e-6)
        if isinstance(cand, PreannihilatorElement):
            T_dual = cand
            tags.append("witness:top-singular-pairs")
        else:
            T_dual = _corner_witness(B if N == M else B[:N, :N], pad_to=M)
            tags.append("witness:corner-svd")
        # the witness carries strict-lower-projection residue up to the
        # recovery tolerance; cut its range basis at the same level
        defect = allpass_defect(B, Qe, T_dual, mu_primal, tol=1e-6)

    sdp = None
    if opts.run_dual_solve and N > 1:
        sdp = dual_program.dual_solve(B[:N, :N], max_iter=opts.dual_max_iter,
                                      tol=opts.dual_tol)
        tags.append(f"dual:sdp-admm({sdp.iterations} iters)")

    Qy = plant.t2o_inv @ Qe @ plant.t3o_inv
    warning = None
    if gap > opts.gap_tol * max(mu_primal, 1e-12):
        warning = (f"bounds gap {gap:.3e} exceeds gap_tol at truncation {N}; "
                   "increase the truncation order")
    return SynthesisResult(
        mu_primal=mu_primal, mu_dual=mu_dual, gap=gap, Q=Q,
        Q_youla=CausalOperator(_roundoff_lower(Qy)), T_dual=T_dual,
        allpass_defect=defect, argmax_level=level, method_tags=tuple(tags),
        warning=warning, sdp_certificate=sdp)


def _corner_witness(B, pad_to=None):
    """Exact rank-1 dual witness from the best corner block."""
    A = as_matrix(B)
    N = A.shape[0]
    P = N if pad_to is None else int(pad_to)
    best_v, best_T = -1.0, np.zeros((P, P))
    for n in range(1, N):
        blk = A[:n, n:]
        if not blk.size:
            continue
        u, s, vt = np.linalg.svd(blk)
        if s[0] > best_v:
            T = np.zeros((P, P), dtype=A.dtype)
            T[n:N, :n] = np.outer(np.conj(vt[0]), np.conj(u[:, 0]))
            best_v, best_T = float(s[0]), T
    return PreannihilatorElement(best_T)


def _roundoff_lower(A):
    up = np.triu(A, 1)
    scale = max(np.abs(A).max(), 1e-300)
    if np.abs(up).max() <= 1e-8 * scale:
        return A - up
    return A


def controller_from_Q(Q, P):
    """K = Q (I - P Q)^{-1}: the controller realizing the Youla parameter Q
    against the stable plant P."""
    Qm = Q.entries if isinstance(Q, CausalOperator) else CausalOperator(as_matrix(Q)).entries
    Pm = P.entries if isinstance(P, CausalOperator) else CausalOperator(as_matrix(P)).entries
    if Qm.shape != Pm.shape:
        raise InvalidInputError("controller_from_Q: dims must agree")
    n = Qm.shape[0]
    Res = np.eye(n) - Pm @ Qm
    dmin = np.abs(np.diag(Res)).min()
    if dmin <= 1e-12 * max(np.abs(Res).max(), 1e-300):
        raise FeedbackIllPosedError(
            f"I - P Q has a numerically zero diagonal entry ({dmin:.3e})")
    K = Qm @ np.linalg.solve(Res, np.eye(n))
    return CausalOperator(_roundoff_lower(K))
