"""Brute-force reference path used to cross-check the main pipeline.

Nothing here imports the rest of the package.  Operators are written out as
explicit 18x18 matrices entry by entry, reductions are index loops, and the
spectrum comes from LAPACK (``numpy.linalg.eigvalsh``) instead of Jacobi.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

DA, DB, DC = 3, 3, 2


def idx3(a: int, b: int, c: int) -> int:
    return (a * DB + b) * DC + c


def chi1() -> np.ndarray:
    r2 = math.sqrt(2.0)
    e = np.eye(3)
    u = e.sum(axis=0) / math.sqrt(3.0)
    vecs = [
        np.kron(e[0], (e[0] - e[1]) / r2),
        np.kron((e[0] - e[1]) / r2, e[2]),
        np.kron(e[2], (e[1] - e[2]) / r2),
        np.kron((e[1] - e[2]) / r2, e[0]),
        np.kron(u, u),
    ]
    m = np.eye(9)
    for v in vecs:
        m = m - np.outer(v, v)
    return m / 4.0


def chi2(a: float) -> np.ndarray:
    m = np.zeros((9, 9))
    for k in range(9):
        m[k, k] = a
    for r, c in itertools.product((0, 4, 8), repeat=2):
        m[r, c] = a
    m[6, 6] = m[8, 8] = (1 + a) / 2
    m[6, 8] = m[8, 6] = math.sqrt(1 - a * a) / 2
    return m / (1 + 8 * a)


def chi3(b: float) -> np.ndarray:
    m = np.zeros((9, 9))
    for i, j in itertools.product(range(3), repeat=2):
        m[3 * i + i, 3 * j + j] += 2.0 / 3.0
    for i, j in ((0, 1), (1, 2), (2, 0)):
        m[3 * i + j, 3 * i + j] += b / 3.0
        m[3 * j + i, 3 * j + i] += (5 - b) / 3.0
    return m / 7.0


def weak_operators(x: float, beta: float, alpha: float) -> list[np.ndarray]:
    """The three 6x6 operators, written out from the cyclic-shift table."""
    e1 = x
    e2 = math.sqrt(beta * (1 - x * x))
    e3 = math.sqrt((1 - beta) * (1 - x * x))
    s = math.sqrt(1 - alpha * alpha)
    phi = np.zeros(6)
    psi = np.zeros(6)
    phi[0], phi[3] = alpha, s
    psi[0], psi[3] = s, -alpha
    p2 = np.outer(phi, phi)
    p3 = np.outer(psi, psi)
    p1 = np.eye(6) - p2 - p3
    return [
        e1 * p1 + e2 * p2 + e3 * p3,
        e2 * p1 + e3 * p2 + e1 * p3,
        e3 * p1 + e1 * p2 + e2 * p3,
    ]


def lift_bc(m: np.ndarray) -> np.ndarray:
    out = np.zeros((18, 18))
    for a, b, c, b2, c2 in itertools.product(range(3), range(3), range(2), range(3), range(2)):
        out[idx3(a, b, c), idx3(a, b2, c2)] = m[2 * b + c, 2 * b2 + c2]
    return out


def lift_ac(m: np.ndarray) -> np.ndarray:
    out = np.zeros((18, 18))
    for a, b, c, a2, c2 in itertools.product(range(3), range(3), range(2), range(3), range(2)):
        out[idx3(a, b, c), idx3(a2, b, c2)] = m[2 * a + c, 2 * a2 + c2]
    return out


def trace_c(rho: np.ndarray) -> np.ndarray:
    out = np.zeros((9, 9), dtype=rho.dtype)
    for a, b, a2, b2, c in itertools.product(range(3), range(3), range(3), range(3), range(2)):
        out[3 * a + b, 3 * a2 + b2] += rho[idx3(a, b, c), idx3(a2, b2, c)]
    return out


def transpose_second(rho: np.ndarray, d1: int, d2: int) -> np.ndarray:
    out = np.zeros_like(rho)
    for i, j, k, l in itertools.product(range(d1), range(d2), range(d1), range(d2)):
        out[i * d2 + j, k * d2 + l] = rho[i * d2 + l, k * d2 + j]
    return out


def negativity(rho: np.ndarray, d1: int, d2: int) -> float:
    ev = np.linalg.eigvalsh(transpose_second(rho, d1, d2))
    val = (np.sum(np.abs(ev)) - 1.0) / (min(d1, d2) - 1)
    return float(val) if val >= 1e-12 else 0.0


def run(chi: np.ndarray, x: float, beta: float, alpha: float) -> dict[tuple[int, int], tuple[float, float | None]]:
    """``{(i, j): (probability, A|B negativity)}`` for the nine branches."""
    anc = np.full((2, 2), 0.5)
    rho = np.kron(chi, anc)
    ops = weak_operators(x, beta, alpha)
    out = {}
    for i in range(3):
        kb = lift_bc(ops[i])
        for j in range(3):
            k = lift_ac(ops[j]) @ kb
            tau = k @ rho @ k.T
            p = float(np.trace(tau))
            out[(i + 1, j + 1)] = (p, negativity(trace_c(tau / p), 3, 3) if p >= 1e-14 else None)
    return out
