"""Core operator types, nest projections, norms and causality predicates.

Matrices live on a finite horizon: an operator on l^2 truncated to its
leading N x N block.  Causal operators are exactly lower triangular in this
picture; the nest is the chain of coordinate truncations P_0 <= ... <= P_N.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import CausalityViolationError, InvalidInputError

# Global numerical-rank policy: singular values below RANK_REL_TOL * sigma_max
# are treated as zero (rank decisions, pseudo-inverses, isometry defects).
RANK_REL_TOL = 1e-12


def as_matrix(M, name="matrix"):
    """Coerce to a 2-D square ndarray of float/complex, rejecting non-finite
    entries."""
    A = np.asarray(M)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInputError(f"{name} must be square 2-D, got shape {A.shape}")
    if A.shape[0] < 1:
        raise InvalidInputError(f"{name} must have dim >= 1")
    if not np.issubdtype(A.dtype, np.number):
        raise InvalidInputError(f"{name} must be numeric")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    if np.issubdtype(A.dtype, np.complexfloating):
        return A.astype(np.complex128)
    return A.astype(np.float64)


def adjoint(M):
    return np.conj(M).T


@dataclass(frozen=True)
class CausalOperator:
    """Exactly lower-triangular N x N matrix (truncated causal operator)."""

    entries: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        A = as_matrix(self.entries, "CausalOperator.entries")
        bad = [(int(i), int(j), A[i, j])
               for i, j in zip(*np.nonzero(np.triu(A, 1)))]
        if bad:
            raise CausalityViolationError(
                f"entries not lower triangular; first offender {bad[0][:2]}",
                offending=bad)
        object.__setattr__(self, "entries", A)
        object.__setattr__(self, "dim", A.shape[0])

    @classmethod
    def from_matrix(cls, M):
        return cls(as_matrix(M))

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n))

    @property
    def mat(self):
        """Plain ndarray alias for the entries."""
        return self.entries


@dataclass(frozen=True)
class PreannihilatorElement:
    """Strictly lower-triangular N x N matrix -- trace-class dual variable."""

    entries: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        A = as_matrix(self.entries, "PreannihilatorElement.entries")
        bad = [(int(i), int(j), A[i, j])
               for i, j in zip(*np.nonzero(np.triu(A)))]
        if bad:
            raise CausalityViolationError(
                f"entries not strictly lower triangular; first offender {bad[0][:2]}",
                offending=bad)
        object.__setattr__(self, "entries", A)
        object.__setattr__(self, "dim", A.shape[0])

    def trace_norm(self):
        return trace_norm(self.entries)


class NestStructure:
    """The nest of coordinate truncations on a horizon of length N."""

    def __init__(self, dim):
        if dim < 1:
            raise InvalidInputError("NestStructure dim must be >= 1")
        self.dim = int(dim)

    def projection(self, n):
        """P_n: diagonal 0/1 projection onto the first n coordinates."""
        if not 0 <= n <= self.dim:
            raise InvalidInputError(f"projection index {n} outside [0, {self.dim}]")
        d = np.zeros(self.dim)
        d[:n] = 1.0
        return np.diag(d)

    def atom(self, n):
        """Delta_n = P_{n+1} - P_n, the n-th rank-1 atom."""
        if not 0 <= n < self.dim:
            raise InvalidInputError(f"atom index {n} outside [0, {self.dim})")
        d = np.zeros(self.dim)
        d[n] = 1.0
        return np.diag(d)


@dataclass(frozen=True)
class PolarParts:
    isometry_factor: np.ndarray
    positive_factor: np.ndarray


def spectral_norm(M):
    """Largest singular value (operator norm)."""
    A = as_matrix(M)
    return float(np.linalg.norm(A, 2))


def trace_norm(M):
    """Sum of singular values (trace-class norm)."""
    A = as_matrix(M)
    return float(np.linalg.svd(A, compute_uv=False).sum())


def hs_norm(M):
    """Frobenius (Hilbert-Schmidt) norm."""
    A = as_matrix(M)
    return float(np.linalg.norm(A))


def polar_decompose(M):
    """M = U * (M^*M)^{1/2} with U a partial isometry supported on the
    numerical range of the positive factor."""
    A = as_matrix(M)
    u, s, vt = np.linalg.svd(A)
    thresh = RANK_REL_TOL * (s[0] if s.size else 0.0)
    r = int(np.sum(s > thresh))
    P = adjoint(vt) @ (s[:, None] * vt)
    U = u[:, :r] @ vt[:r]
    return PolarParts(isometry_factor=U, positive_factor=P)


def is_partial_isometry(M, tol):
    """(flag, defect): defect is the largest deviation |sigma - 1| over the
    numerically nonzero singular values."""
    if tol <= 0:
        raise InvalidInputError("tol must be positive")
    A = as_matrix(M)
    s = np.linalg.svd(A, compute_uv=False)
    keep = s > RANK_REL_TOL * (s[0] if s.size else 0.0)
    if not np.any(keep):
        return True, 0.0
    defect = float(np.max(np.abs(s[keep] - 1.0)))
    return defect <= tol, defect


def corner_block_norms(M):
    """norms[n-1] = ||P_n M (I - P_n)|| for n = 1..N (top-right corners)."""
    A = as_matrix(M)
    N = A.shape[0]
    out = np.zeros(N)
    for n in range(1, N + 1):
        blk = A[:n, n:]
        out[n - 1] = np.linalg.norm(blk, 2) if blk.size else 0.0
    return out


def causality_defect(M):
    """(causal_defect, strict_defect).

    causal_defect = max_n ||P_n M (I-P_n)||  (zero iff lower triangular);
    strict_defect = max_n ||P_{n+1} M (I-P_n)|| (zero iff strictly lower).
    """
    A = as_matrix(M)
    N = A.shape[0]
    causal = float(corner_block_norms(A).max()) if N else 0.0
    strict = 0.0
    for n in range(N):
        blk = A[:n + 1, n:]
        if blk.size:
            strict = max(strict, float(np.linalg.norm(blk, 2)))
    return causal, strict
