"""Test-plant generation, serialization, and closed-loop simulation."""

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import CausalityViolationError, InvalidInputError
from .operator_core import CausalOperator, as_matrix, spectral_norm

_KINDS = ("random_causal", "periodic", "lti_toeplitz", "explicit")
_CSV_HEADER = "# tvsyn-matrix v1"


@dataclass(frozen=True)
class PlantSpec:
    kind: str
    dim: int
    seed: int = 0
    decay: float = 1.0
    period: Optional[int] = None
    impulse_response: Optional[Sequence[float]] = None
    entries: Optional[np.ndarray] = None
    diag_shift: float = 0.0  # added to the diagonal (conditioning knob)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvalidInputError(f"unknown plant kind {self.kind!r}")
        if self.dim < 1:
            raise InvalidInputError("dim must be >= 1")
        if not 0.0 < self.decay <= 1.0:
            raise InvalidInputError("decay must lie in (0, 1]")
        if self.kind == "periodic":
            if not self.period or not 1 <= self.period <= self.dim:
                raise InvalidInputError("periodic kind needs 1 <= period <= dim")
        if self.kind == "lti_toeplitz" and not self.impulse_response:
            raise InvalidInputError("lti_toeplitz kind needs impulse_response")
        if self.kind == "explicit" and self.entries is None:
            raise InvalidInputError("explicit kind needs entries")


def generate(spec):
    """Deterministic plant synthesis from a PlantSpec."""
    n = spec.dim
    if spec.kind == "explicit":
        return CausalOperator(np.tril(as_matrix(spec.entries)))
    if spec.kind == "lti_toeplitz":
        h = np.asarray(spec.impulse_response, dtype=float)
        A = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1):
                if i - j < len(h):
                    A[i, j] = h[i - j] * spec.decay ** (i - j)
        A[np.diag_indices(n)] += spec.diag_shift
        return CausalOperator(A)
    rng = np.random.default_rng(spec.seed)
    q = spec.period if spec.kind == "periodic" else n
    base = rng.standard_normal((q, n))
    A = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            A[i, j] = base[i % q, i - j] * spec.decay ** (i - j)
    A[np.diag_indices(n)] += spec.diag_shift
    return CausalOperator(A)


def save_operator(M, path, format="csv"):
    """Write a matrix to disk; round trips bit-exactly for finite doubles."""
    A = M.entries if isinstance(M, CausalOperator) else as_matrix(M)
    if np.iscomplexobj(A):
        raise InvalidInputError("serialization supports real matrices only")
    n = A.shape[0]
    if format == "csv":
        lines = [f"{_CSV_HEADER}, dim={n}"]
        for i in range(n):
            lines.append(",".join(repr(float(x)) for x in A[i]))
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    elif format == "json":
        entries = [[int(i), int(j), float(A[i, j])]
                   for i in range(n) for j in range(n) if A[i, j] != 0.0]
        with open(path, "w") as fh:
            json.dump({"dim": n, "entries": entries}, fh)
            fh.write("\n")
    else:
        raise InvalidInputError(f"unknown format {format!r}")


def load_operator(path, format="csv", causal=False):
    """Read a matrix written by save_operator.

    With causal=True the result is validated as a CausalOperator and the
    error names the offending entries; otherwise a plain ndarray is
    returned.
    """
    if format == "csv":
        A = _load_csv(path)
    elif format == "json":
        A = _load_json(path)
    else:
        raise InvalidInputError(f"unknown format {format!r}")
    if not causal:
        return A
    bad = [(int(i), int(j), A[i, j]) for i, j in zip(*np.nonzero(np.triu(A, 1)))]
    if bad:
        raise CausalityViolationError(
            f"{path}: matrix not lower triangular; offending entries "
            + ", ".join(f"({i},{j})" for i, j, _ in bad[:5]), offending=bad)
    return CausalOperator(A)


def _load_csv(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith(_CSV_HEADER):
        raise InvalidInputError(f"{path}:1: missing '{_CSV_HEADER}' header")
    try:
        dim = int(lines[0].split("dim=")[1])
    except (IndexError, ValueError):
        raise InvalidInputError(f"{path}:1: malformed header {lines[0]!r}")
    rows = [ln for ln in lines[1:] if ln.strip()]
    if len(rows) != dim:
        raise InvalidInputError(
            f"{path}: expected {dim} data rows, found {len(rows)}")
    A = np.zeros((dim, dim))
    for i, ln in enumerate(rows):
        parts = ln.split(",")
        if len(parts) != dim:
            raise InvalidInputError(
                f"{path}:{i + 2}: expected {dim} columns, found {len(parts)}")
        for j, tok in enumerate(parts):
            try:
                A[i, j] = float(tok)
            except ValueError:
                raise InvalidInputError(
                    f"{path}:{i + 2}:{j + 1}: cannot parse {tok!r}")
    return as_matrix(A)


def _load_json(path):
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise InvalidInputError(f"{path}:{e.lineno}:{e.colno}: {e.msg}")
    if not isinstance(doc, dict) or "dim" not in doc:
        raise InvalidInputError(f"{path}: JSON kernel must carry 'dim'")
    dim = int(doc["dim"])
    if dim < 1:
        raise InvalidInputError(f"{path}: dim must be >= 1")
    A = np.zeros((dim, dim))
    for k, ent in enumerate(doc.get("entries", [])):
        try:
            i, j, v = int(ent[0]), int(ent[1]), float(ent[2])
        except (TypeError, ValueError, IndexError):
            raise InvalidInputError(f"{path}: malformed entry #{k}: {ent!r}")
        if not (0 <= i < dim and 0 <= j < dim):
            raise InvalidInputError(
                f"{path}: entry #{k} index ({i},{j}) outside dim {dim}")
        A[i, j] = v
    return as_matrix(A)


def _closed_loop(T1, T2, T3, Q):
    mats = []
    for X in (T1, T2, T3, Q):
        mats.append(X.entries if isinstance(X, CausalOperator) else as_matrix(X))
    T1m, T2m, T3m, Qm = mats
    if not (T1m.shape == T2m.shape == T3m.shape == Qm.shape):
        raise InvalidInputError("closed loop: dims must agree")
    return T1m - T2m @ Qm @ T3m


def simulate_closed_loop(T1, T2, T3, Q, w):
    """(z, gain): z = (T1 - T2 Q T3) w and gain = ||z|| / ||w||."""
    Tzw = _closed_loop(T1, T2, T3, Q)
    wv = np.asarray(w, dtype=Tzw.dtype).ravel()
    if wv.shape[0] != Tzw.shape[0]:
        raise InvalidInputError("simulate_closed_loop: disturbance length mismatch")
    nw = float(np.linalg.norm(wv))
    if nw == 0.0:
        raise InvalidInputError("simulate_closed_loop: zero disturbance")
    z = Tzw @ wv
    return z, float(np.linalg.norm(z)) / nw


def worst_case_disturbance(T1, T2, T3, Q):
    """(w, degenerate): top right singular vector of the closed loop; when
    the closed loop is zero any unit vector works and the flag is set."""
    Tzw = _closed_loop(T1, T2, T3, Q)
    u, s, vt = np.linalg.svd(Tzw)
    if s.size == 0 or s[0] == 0.0:
        w = np.zeros(Tzw.shape[0])
        w[0] = 1.0
        return w, True
    return np.conj(vt[0]), False
