"""Dense complex-matrix kernel.

Matrices are plain ``numpy`` arrays.  Every function returns a fresh array and
never writes into its arguments.  Subsystems are addressed by label through a
:class:`DimSignature`; the first label is the slowest-varying tensor index, so
for the canonical ``(A:3, B:3, C:2)`` layout the basis index decodes as
``n = iA*6 + iB*2 + iC``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
EQUAL_TOL = 1e-12
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100


class NotHermitianError(ValueError):
    """Raised when a spectral routine receives a non-Hermitian matrix."""


class JacobiConvergenceError(RuntimeError):
    pass


class LabelError(ValueError):
    """Unknown or duplicate subsystem label."""


@dataclass(frozen=True)
class DimSignature:
    """Ordered subsystem dimensions with distinct labels."""

    dims: tuple[int, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "labels", tuple(str(lb) for lb in self.labels))
        if len(self.dims) != len(self.labels):
            raise ValueError("dims and labels must have the same length")
        if not self.dims:
            raise ValueError("a signature needs at least one subsystem")
        if any(d < 1 for d in self.dims):
            raise ValueError(f"subsystem dimensions must be positive, got {self.dims}")
        if len(set(self.labels)) != len(self.labels):
            raise LabelError(f"duplicate subsystem labels in {self.labels}")

    @property
    def size(self) -> int:
        return math.prod(self.dims)

    def dim(self, label: str) -> int:
        return self.dims[self.index(label)]

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LabelError(f"unknown subsystem label {label!r}; have {self.labels}") from None

    def dim_of(self, labels: Iterable[str]) -> int:
        return math.prod(self.dim(lb) for lb in labels)

    def without(self, labels: Iterable[str]) -> "DimSignature":
        drop = set(_check_labels(self, labels))
        keep = [i for i, lb in enumerate(self.labels) if lb not in drop]
        if not keep:
            raise ValueError("cannot remove every subsystem")
        return DimSignature(tuple(self.dims[i] for i in keep), tuple(self.labels[i] for i in keep))

    def __str__(self):
        return "(" + ",".join(f"{lb}:{d}" for lb, d in zip(self.labels, self.dims)) + ")"


CANONICAL = DimSignature((3, 3, 2), ("A", "B", "C"))


def _check_labels(sig: DimSignature, labels: Iterable[str]) -> list[str]:
    if isinstance(labels, str):
        labels = [labels]
    labels = list(labels)
    if len(set(labels)) != len(labels):
        raise LabelError(f"duplicate labels in {labels}")
    for lb in labels:
        sig.index(lb)
    return labels


def _check_square(m: np.ndarray, sig: DimSignature | None = None) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if sig is not None and m.shape[0] != sig.size:
        raise ValueError(f"matrix dimension {m.shape[0]} does not match signature {sig} (size {sig.size})")
    return m


def tensor(m1: np.ndarray, m2: np.ndarray) -> np.ndarray:
    """Kronecker product, ``m1`` carrying the slower-varying index."""
    return np.kron(np.asarray(m1), np.asarray(m2))


def embed_operator(op: np.ndarray, target_labels: Sequence[str], sig: DimSignature) -> np.ndarray:
    """Lift ``op`` (ordered as ``target_labels``) to the full space of ``sig``.

    Identity acts on every subsystem not named in ``target_labels``.  Targets
    need not be contiguous: embedding onto ``(A, C)`` of ``(A, B, C)`` permutes
    the tensor legs across ``B``.
    """
    targets = _check_labels(sig, target_labels)
    op = _check_square(op)
    if op.shape[0] != sig.dim_of(targets):
        raise ValueError(
            f"operator dimension {op.shape[0]} does not match targets {targets} (product {sig.dim_of(targets)})"
        )
    rest = [lb for lb in sig.labels if lb not in targets]
    order = targets + rest
    dims = [sig.dim(lb) for lb in order]
    full = np.kron(op, np.eye(sig.dim_of(rest))) if rest else np.array(op, copy=True)
    n = len(order)
    t = full.reshape(dims + dims)
    # axis k of t belongs to order[k]; move it back to canonical position
    src = [order.index(lb) for lb in sig.labels]
    t = t.transpose(src + [s + n for s in src])
    return t.reshape(sig.size, sig.size)


def partial_trace(rho: np.ndarray, sig: DimSignature, traced_labels: Iterable[str]) -> np.ndarray:
    """Trace out ``traced_labels``; remaining subsystems keep their order."""
    traced = _check_labels(sig, traced_labels)
    rho = _check_square(rho, sig)
    if not traced:
        return np.array(rho, copy=True)
    n = len(sig.dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for lb in traced:
        k = sig.index(lb)
        col[k] = row[k]
    out_row = [row[k] for k in range(n) if sig.labels[k] not in traced]
    out_col = [col[k] for k in range(n) if sig.labels[k] not in traced]
    spec = "".join(row + col) + "->" + "".join(out_row + out_col)
    reduced = np.einsum(spec, rho.reshape(sig.dims + sig.dims))
    d = sig.without(traced).size
    return reduced.reshape(d, d)


def partial_transpose(rho: np.ndarray, sig: DimSignature, transposed_labels: str | Iterable[str]) -> np.ndarray:
    """Transpose the row/column indices of the named subsystems.

    For a bipartite ``A|B`` state transposing ``"B"`` gives the usual
    ``rho^{T_B}[(i,j),(k,l)] = rho[(i,l),(k,j)]``.  Passing several labels
    transposes that whole side of a grouping such as ``AB|C``.
    """
    labels = _check_labels(sig, transposed_labels)
    rho = _check_square(rho, sig)
    n = len(sig.dims)
    axes = list(range(2 * n))
    for lb in labels:
        k = sig.index(lb)
        axes[k], axes[k + n] = axes[k + n], axes[k]
    return rho.reshape(sig.dims + sig.dims).transpose(axes).reshape(sig.size, sig.size)


def hermiticity_error(m: np.ndarray) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m - np.swapaxes(m, -1, -2).conj()))) if m.size else 0.0


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return hermiticity_error(m) <= tol


@lru_cache(maxsize=None)
def _round_robin(n: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """Pairings covering every (p, q), p < q, exactly once per sweep.

    Pairs inside one round are disjoint, so their rotations commute and can be
    applied together.
    """
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for k in range(m // 2):
            a, b = players[k], players[m - 1 - k]
            if a < n and b < n:
                ps.append(min(a, b))
                qs.append(max(a, b))
        rounds.append((np.array(ps, dtype=int), np.array(qs, dtype=int)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return tuple(rounds)


def _jacobi_diagonalize(a: np.ndarray, tol: float, max_sweeps: int) -> np.ndarray:
    """Cyclic complex Jacobi on a stack ``(k, n, n)``; returns the rotated stack."""
    k, n, _ = a.shape
    rounds = _round_robin(n)
    eye = np.eye(n, dtype=complex)
    offmask = ~np.eye(n, dtype=bool)
    scale = np.maximum(1.0, np.linalg.norm(a.reshape(k, -1), axis=1))
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(a[:, offmask]) ** 2, axis=1))
        if np.all(off <= tol * scale):
            return a
        for p, q in rounds:
            app = a[:, p, p].real
            aqq = a[:, q, q].real
            apq = a[:, p, q]
            g = np.abs(apq)
            live = g > 1e-300
            g_safe = np.where(live, g, 1.0)
            theta = (aqq - app) / (2.0 * g_safe)
            sgn = np.where(theta >= 0, 1.0, -1.0)
            t = np.where(live, sgn / (np.abs(theta) + np.hypot(theta, 1.0)), 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            phase = np.where(live, apq / g_safe, 1.0)
            v = np.broadcast_to(eye, (k, n, n)).copy()
            # V = diag(1, e^{-i arg a_pq}) . [[c, s], [-s, c]] on the (p, q) block
            v[:, p, p] = c
            v[:, p, q] = s
            v[:, q, p] = -s * phase.conj()
            v[:, q, q] = c * phase.conj()
            a = np.swapaxes(v, 1, 2).conj() @ a @ v
    off = np.sqrt(np.sum(np.abs(a[:, offmask]) ** 2, axis=1))
    if np.all(off <= tol * scale):
        return a
    raise JacobiConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps (off-norm {off.max():.3e})")


def hermitian_eigenvalues(
    m: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS
) -> np.ndarray:
    """Ascending real spectrum of a Hermitian matrix via cyclic Jacobi rotations.

    Accepts a single ``(n, n)`` matrix or a stack ``(..., n, n)``; stacks are
    rotated together and return one sorted spectrum per matrix.
    """
    m = np.asarray(m)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {m.shape}")
    err = hermiticity_error(m)
    if err > HERMITIAN_TOL:
        raise NotHermitianError(f"matrix is not Hermitian (max |m - m^H| = {err:.3e})")
    lead = m.shape[:-2]
    n = m.shape[-1]
    a = m.reshape((-1, n, n)).astype(complex)
    # symmetrize away sub-tolerance roundoff so the diagonal is exactly real
    a = 0.5 * (a + np.swapaxes(a, 1, 2).conj())
    if n > 1 and a.shape[0]:
        a = _jacobi_diagonalize(a, tol, max_sweeps)
    evals = np.sort(np.real(np.diagonal(a, axis1=1, axis2=2)), axis=1)
    return evals.reshape(lead + (n,))


def trace_norm(m: np.ndarray) -> float | np.ndarray:
    """Sum of absolute eigenvalues (Hermitian input only)."""
    return np.sum(np.abs(hermitian_eigenvalues(m)), axis=-1)


def allclose(a: np.ndarray, b: np.ndarray, atol: float = EQUAL_TOL) -> bool:
    return bool(np.asarray(a).shape == np.asarray(b).shape and np.max(np.abs(np.asarray(a) - np.asarray(b)), initial=0.0) <= atol)
