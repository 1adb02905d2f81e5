"""Hankel and Toeplitz operators on causal Hilbert-Schmidt matrices.

The Hankel operator with symbol B maps a lower-triangular A to the
strictly-upper part of B A; its norm equals the distance from B to the
causal matrices.  The companion Toeplitz operator keeps the causal part of
G A.  Both are materialized on the orthonormal entry basis of the
lower-triangular matrices; the mixed operator H^* H + T_G drives the mixed
sensitivity value.
"""

from dataclasses import dataclass

import numpy as np

from .errors import IdentityViolationError, InvalidInputError
from .operator_core import (RANK_REL_TOL, CausalOperator, adjoint, as_matrix,
                            hs_norm)

# materialized SVD below this horizon, power iteration above
_DENSE_LIMIT = 40


def lower_index_pairs(N):
    """Row-major enumeration of the on-and-below-diagonal positions."""
    return [(i, j) for i in range(N) for j in range(i + 1)]


def upper_index_pairs(N):
    """Row-major enumeration of the strictly-above-diagonal positions."""
    return [(i, j) for i in range(N) for j in range(i + 1, N)]


def hankel_apply(B, A):
    """Strictly-upper part of B A (the anticausal leak of the product)."""
    Bm = as_matrix(B)
    Am = A.entries if isinstance(A, CausalOperator) else as_matrix(A)
    if Bm.shape != Am.shape:
        raise InvalidInputError("hankel_apply: dims must agree")
    return np.triu(Bm @ Am, 1)


def toeplitz_apply(G, A):
    """Causal part (diagonal kept) of G A for Hermitian G."""
    Gm = as_matrix(G)
    nrm = float(np.linalg.norm(Gm, 2))
    if nrm > 0 and np.linalg.norm(Gm - adjoint(Gm), 2) > 1e-10 * nrm:
        raise InvalidInputError("toeplitz_apply: symbol must be Hermitian")
    Am = A.entries if isinstance(A, CausalOperator) else as_matrix(A)
    if Gm.shape != Am.shape:
        raise InvalidInputError("toeplitz_apply: dims must agree")
    return CausalOperator(np.tril(Gm @ Am))


@dataclass(frozen=True)
class HankelMap:
    symbol: np.ndarray
    matrix: np.ndarray  # len(codomain_pairs) x len(domain_pairs)
    domain_pairs: tuple
    codomain_pairs: tuple

    @classmethod
    def build(cls, B):
        Bm = as_matrix(B)
        N = Bm.shape[0]
        low = lower_index_pairs(N)
        up = upper_index_pairs(N)
        H = np.zeros((len(up), len(low)), dtype=Bm.dtype)
        # the map acts column-separately: basis matrix E_ij maps to the
        # strictly-upper part of column j of B scaled into column j
        for c, (i, j) in enumerate(low):
            col = Bm[:, i]  # (B E_ij) has column j equal to B[:, i]
            for r, (p, q) in enumerate(up):
                if q == j:
                    H[r, c] = col[p]
        return cls(symbol=Bm, matrix=H, domain_pairs=tuple(low),
                   codomain_pairs=tuple(up))


def vec_lower(A, pairs):
    return np.array([A[p] for p in pairs])


def unvec_lower(x, pairs, N):
    A = np.zeros((N, N), dtype=np.asarray(x).dtype)
    for v, p in zip(x, pairs):
        A[p] = v
    return A


def _power_hankel_norm(B, tol=1e-10, max_iter=10000):
    """Largest singular value of the Hankel map without materialization."""
    N = B.shape[0]
    rng = np.random.default_rng(0)
    A = np.tril(rng.standard_normal((N, N)))
    A /= hs_norm(A)
    prev = 0.0
    for _ in range(max_iter):
        Y = np.triu(B @ A, 1)
        A2 = np.tril(adjoint(B) @ Y)
        nrm = hs_norm(A2)
        if nrm == 0.0:
            return 0.0, CausalOperator(A)
        A = A2 / nrm
        sigma = np.sqrt(nrm)
        if abs(sigma - prev) <= tol * max(sigma, 1e-30):
            break
        prev = sigma
    return float(sigma), CausalOperator(A)


def hankel_norm(B):
    """(norm, maximizer): the operator norm of the Hankel map and a unit
    lower-triangular matrix attaining it."""
    Bm = as_matrix(B)
    N = Bm.shape[0]
    if N > _DENSE_LIMIT:
        return _power_hankel_norm(Bm)
    hm = HankelMap.build(Bm)
    if hm.matrix.size == 0:
        return 0.0, CausalOperator(unvec_lower(
            np.eye(1)[0], hm.domain_pairs[:1], N))
    u, s, vt = np.linalg.svd(hm.matrix)
    if s.size == 0 or s[0] == 0.0:
        e = np.zeros(len(hm.domain_pairs))
        e[0] = 1.0
        return 0.0, CausalOperator(unvec_lower(e, hm.domain_pairs, N))
    A = unvec_lower(np.conj(vt[0]), hm.domain_pairs, N)
    return float(s[0]), CausalOperator(A)


def q_from_maximizing_vector(B, A, tol=1e-7):
    """Extract an optimal causal Q from a norm-attaining A via the
    identity Q A = causal-part(B A).

    With a full-rank A the system pins Q uniquely; a rank-deficient A
    determines Q on range(A) only, and the returned Q is a row-wise
    least-squares solution checked against the distance; when that check
    fails the undetermined complement is filled through sequential
    completion instead.  Returns (Q, report dict).
    """
    from .nest_distance import arveson_distance, parrott_complete

    Bm = as_matrix(B)
    Am = A.entries if isinstance(A, CausalOperator) else as_matrix(A)
    if Bm.shape != Am.shape:
        raise InvalidInputError("q_from_maximizing_vector: dims must agree")
    N = Bm.shape[0]
    rhs = np.tril(Bm @ Am)  # B A - hankel_apply(B, A)
    s = np.linalg.svd(Am, compute_uv=False)
    rank = int(np.sum(s > RANK_REL_TOL * (s[0] if s.size else 0.0)))
    mu, _ = arveson_distance(Bm)
    scale = max(np.linalg.norm(Bm, 2) * np.linalg.norm(Am, 2), 1e-300)
    report = {"determined_dim": rank, "full_rank": rank == N,
              "method": "solve"}
    if rank == N:
        Q = np.linalg.solve(Am.T, rhs.T).T
        Q = _force_lower(Q, tol)
    else:
        # row i of Q only sees the first i+1 rows of A
        Q = np.zeros((N, N), dtype=np.result_type(Bm.dtype, np.float64))
        for i in range(N):
            Q[i, :i + 1] = rhs[i, :] @ np.linalg.pinv(Am[:i + 1, :],
                                                      rcond=RANK_REL_TOL)
        report["method"] = "rowwise-least-squares"
    if np.linalg.norm(Bm - Q, 2) > mu + tol * max(mu, 1.0):
        # the least-squares point is optimal on range(A) only; complete
        # the free part at the optimal level instead
        Qc = parrott_complete(Bm, mu * (1 + 1e-9))
        resid = np.linalg.norm(Qc.entries @ Am - rhs)
        if resid > tol * scale:
            raise IdentityViolationError(
                f"Q A = causal(B A) violated by completed Q: residual "
                f"{resid:.3e} (A not a maximizer?)")
        report["method"] = "parrott-completion"
        return Qc, report
    return CausalOperator(Q), report


def _force_lower(Q, tol):
    up = np.triu(Q, 1)
    scale = max(np.abs(Q).max(), 1e-300)
    if np.abs(up).max() > tol * scale:
        raise IdentityViolationError(
            "full-rank extraction produced a non-causal Q "
            f"(upper leak {np.abs(up).max():.3e})")
    return Q - up


@dataclass(frozen=True)
class ToeplitzMap:
    symbol_gram: np.ndarray
    matrix: np.ndarray
    pairs: tuple

    @classmethod
    def build(cls, G):
        Gm = as_matrix(G)
        nrm = float(np.linalg.norm(Gm, 2))
        if nrm > 0 and np.linalg.norm(Gm - adjoint(Gm), 2) > 1e-10 * nrm:
            raise InvalidInputError("ToeplitzMap: symbol must be Hermitian")
        N = Gm.shape[0]
        low = lower_index_pairs(N)
        T = np.zeros((len(low), len(low)), dtype=Gm.dtype)
        for c, (i, j) in enumerate(low):
            col = Gm[:, i]
            for r, (p, q) in enumerate(low):
                if q == j:
                    T[r, c] = col[p]
        return cls(symbol_gram=Gm, matrix=0.5 * (T + adjoint(T)), pairs=tuple(low))


def mixed_operator_norm(hankel_symbol, gram):
    """Largest eigenvalue of H^* H + T_gram on the causal HS space."""
    Gm = as_matrix(gram)
    w = np.linalg.eigvalsh(0.5 * (Gm + adjoint(Gm)))
    if w.size and w[0] < -1e-10 * max(abs(w[-1]), 1.0):
        raise InvalidInputError(
            f"mixed_operator_norm: gram not PSD (min eigenvalue {w[0]:.3e})")
    H = HankelMap.build(hankel_symbol).matrix
    T = ToeplitzMap.build(Gm).matrix
    Mx = adjoint(H) @ H + T
    ev = np.linalg.eigvalsh(0.5 * (Mx + adjoint(Mx)))
    return float(max(ev[-1], 0.0)) if ev.size else 0.0
