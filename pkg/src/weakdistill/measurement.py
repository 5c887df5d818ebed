"""Weak three-outcome measurements on a qutrit-qubit pair and the two-round protocol.

Each party's qutrit is measured jointly with the shared ancilla qubit.  The
6-dimensional space is ordered qutrit-major, so ``|k, c'>`` sits at ``2*k + c``.
Bob measures first (outcome ``i``, on B and C), Alice second (outcome ``j``,
on A and C).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg
from .linalg import CANONICAL
from .states import AB, C, DensityMatrix, Ket

NULL_BRANCH_TOL = 1e-14
DEFAULT_BETA = 0.1
DEFAULT_ALPHA = 1.0 / math.sqrt(2.0)
QUBIT_PAIR = linalg.DimSignature((3, 2), ("Q", "C"))


class DegeneracyWarning(UserWarning):
    """beta = 1/2 makes the first outcome unable to entangle the ancilla."""


class NullBranchError(RuntimeError):
    """A measurement branch has (numerically) zero probability."""

    def __init__(self, outcome: tuple[int, ...], probability: float):
        self.outcome = outcome
        self.probability = probability
        super().__init__(f"branch {outcome} has probability {probability:.3e} < {NULL_BRANCH_TOL:g}")


def _open_unit(name: str, value: float) -> float:
    value = float(value)
    if not (0.0 < value < 1.0):
        raise ValueError(f"{name} must lie in the open interval (0, 1), got {value!r}")
    return value


@dataclass(frozen=True)
class MeasurementParams:
    x: float
    beta: float = DEFAULT_BETA
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        x = float(self.x)
        if not (0.0 <= x <= 1.0):
            raise ValueError(f"x must lie in [0, 1], got {self.x!r}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "beta", _open_unit("beta", self.beta))
        object.__setattr__(self, "alpha", _open_unit("alpha", self.alpha))

    @property
    def epsilons(self) -> tuple[float, float, float]:
        return epsilons(self.x, self.beta)

    @property
    def zeta(self) -> float:
        return weakness(self.x, self.beta)


def epsilons(x: float, beta: float) -> tuple[float, float, float]:
    rest = 1.0 - x * x
    return x, math.sqrt(beta * rest), math.sqrt((1.0 - beta) * rest)


def weakness(x: float, beta: float) -> float:
    """Weight of the identity channel in the weak-measurement decomposition."""
    e1, e2, e3 = epsilons(x, beta)
    return e1 * e2 + e2 * e3 + e1 * e3


def weakness_profile(beta: float, x_grid: Sequence[float]) -> list[tuple[float, float]]:
    beta = _open_unit("beta", beta)
    out = []
    for x in x_grid:
        x = float(x)
        if not (0.0 <= x <= 1.0):
            raise ValueError(f"grid value {x!r} outside [0, 1]")
        out.append((x, weakness(x, beta)))
    return out


def phi_ket(alpha: float) -> Ket:
    v = np.zeros(6)
    v[0], v[3] = alpha, math.sqrt(1.0 - alpha * alpha)
    return Ket(v, QUBIT_PAIR)


def psi_ket(alpha: float) -> Ket:
    v = np.zeros(6)
    v[0], v[3] = math.sqrt(1.0 - alpha * alpha), -alpha
    return Ket(v, QUBIT_PAIR)


def make_projectors(alpha: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``P1`` (rank 4), ``P2 = |phi><phi|``, ``P3 = |psi><psi|`` on qutrit x qubit."""
    alpha = _open_unit("alpha", alpha)
    p2 = phi_ket(alpha).projector()
    p3 = psi_ket(alpha).projector()
    return np.eye(6) - p2 - p3, p2, p3


def coefficient_index(i: int, j: int) -> int:
    """Index ``l`` of the epsilon multiplying ``P_j`` in ``M_i``: ``j (+) (i-1)`` mod 3, 0 read as 3."""
    l = (j + i - 1) % 3
    return 3 if l == 0 else l


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    params: MeasurementParams
    projectors: tuple[np.ndarray, np.ndarray, np.ndarray]
    operators: tuple[np.ndarray, np.ndarray, np.ndarray]

    @property
    def zeta(self) -> float:
        return self.params.zeta

    def operator(self, i: int) -> np.ndarray:
        """``M_i`` for ``i`` in 1..3."""
        return self.operators[i - 1]

    def completeness(self) -> np.ndarray:
        return sum(m.conj().T @ m for m in self.operators)


def make_measurement_set(params: MeasurementParams) -> MeasurementSet:
    if params.beta == 0.5:
        warnings.warn(
            "beta = 1/2: outcome M_1 cannot entangle the measured qutrit with the ancilla",
            DegeneracyWarning,
            stacklevel=2,
        )
    projs = make_projectors(params.alpha)
    eps = params.epsilons
    ops = []
    for i in (1, 2, 3):
        m = sum(eps[coefficient_index(i, j) - 1] * projs[j - 1] for j in (1, 2, 3))
        assert linalg.is_hermitian(m), "M_i must be Hermitian"
        m = np.array(m, dtype=complex)
        m.flags.writeable = False
        ops.append(m)
    for p in projs:
        p.flags.writeable = False
    return MeasurementSet(params, tuple(projs), tuple(ops))


def _as_array(state):
    return state.matrix if isinstance(state, DensityMatrix) else np.asarray(state)


def strong_channel(state, alpha: float):
    """Projective channel ``X -> sum_j P_j X P_j``; keeps the input's type."""
    x = _as_array(state)
    if x.shape != (6, 6):
        raise ValueError(f"strong channel acts on 6x6 qutrit-qubit matrices, got {x.shape}")
    out = sum(p @ x @ p for p in make_projectors(alpha))
    if isinstance(state, DensityMatrix):
        return DensityMatrix(out, state.sig)
    return out


def weak_channel(state, mset: MeasurementSet):
    """Non-selective weak measurement ``X -> sum_i M_i X M_i^dagger``."""
    x = _as_array(state)
    out = sum(m @ x @ m.conj().T for m in mset.operators)
    if isinstance(state, DensityMatrix):
        return DensityMatrix(out, state.sig)
    return out


@dataclass(frozen=True, eq=False)
class OutcomeRecord:
    """One (Bob ``i``, Alice ``j``) history of the protocol.

    ``state`` is the normalized conditional state on (A, B, C), or ``None``
    when the branch probability is below the null-branch threshold.
    """

    bob_outcome: int
    alice_outcome: int
    joint_probability: float
    state: DensityMatrix | None
    bob_probability: float

    @property
    def outcome(self) -> tuple[int, int]:
        return self.bob_outcome, self.alice_outcome

    @property
    def is_null(self) -> bool:
        return self.state is None

    @property
    def alice_conditional_probability(self) -> float:
        """p(j | Bob got i)."""
        return self.joint_probability / self.bob_probability if self.bob_probability > 0 else 0.0


@dataclass(frozen=True, eq=False)
class BobBranch:
    outcome: int
    probability: float
    state: DensityMatrix | None  # normalized (A, B, C) state after Bob's round


def initial_state(chi: DensityMatrix, ancilla: DensityMatrix) -> DensityMatrix:
    if chi.sig != AB:
        raise ValueError(f"initial state must live on {AB}, got {chi.sig}")
    if ancilla.sig != C:
        raise ValueError(f"ancilla must live on {C}, got {ancilla.sig}")
    return chi.tensor(ancilla)


def _krausians(mset: MeasurementSet, labels: list[str]) -> list[np.ndarray]:
    return [linalg.embed_operator(m, labels, CANONICAL) for m in mset.operators]


def bob_round(chi: DensityMatrix, mset: MeasurementSet, ancilla: DensityMatrix) -> list[BobBranch]:
    rho = initial_state(chi, ancilla).matrix
    out = []
    for i, k in enumerate(_krausians(mset, ["B", "C"]), start=1):
        sigma = k @ rho @ k.conj().T
        p = float(np.trace(sigma).real)
        state = DensityMatrix(sigma / p, CANONICAL, validate=False) if p >= NULL_BRANCH_TOL else None
        out.append(BobBranch(i, p, state))
    return out


def apply_protocol(
    chi: DensityMatrix,
    mset: MeasurementSet,
    ancilla: DensityMatrix,
    alice_mset: MeasurementSet | None = None,
    on_null: str = "keep",
) -> list[OutcomeRecord]:
    """Run Bob's then Alice's weak measurement; return the nine branches.

    Records come ordered by (Bob outcome, Alice outcome).  ``alice_mset``
    lets Alice use different parameters than Bob; by default both share
    ``mset``.  Null branches are kept with ``state=None`` or, with
    ``on_null="raise"``, abort with :class:`NullBranchError`.
    """
    if on_null not in ("keep", "raise"):
        raise ValueError("on_null must be 'keep' or 'raise'")
    rho = initial_state(chi, ancilla).matrix
    bob_ops = _krausians(mset, ["B", "C"])
    alice_ops = _krausians(alice_mset or mset, ["A", "C"])
    records = []
    for i, kb in enumerate(bob_ops, start=1):
        sigma = kb @ rho @ kb.conj().T
        p_bob = float(np.trace(sigma).real)
        for j, ka in enumerate(alice_ops, start=1):
            tau = ka @ sigma @ ka.conj().T
            p = float(np.trace(tau).real)
            if p < NULL_BRANCH_TOL:
                if on_null == "raise":
                    raise NullBranchError((i, j), p)
                records.append(OutcomeRecord(i, j, 0.0, None, p_bob))
                continue
            records.append(OutcomeRecord(i, j, p, DensityMatrix(tau / p, CANONICAL, validate=False), p_bob))
    return records


def branch_record(
    chi: DensityMatrix,
    mset: MeasurementSet,
    ancilla: DensityMatrix,
    outcome: tuple[int, int],
    alice_mset: MeasurementSet | None = None,
) -> OutcomeRecord:
    """A single (Bob ``i``, Alice ``j``) branch without computing the other eight."""
    i, j = outcome
    rho = initial_state(chi, ancilla).matrix
    kb = linalg.embed_operator(mset.operator(i), ["B", "C"], CANONICAL)
    ka = linalg.embed_operator((alice_mset or mset).operator(j), ["A", "C"], CANONICAL)
    sigma = kb @ rho @ kb.conj().T
    tau = ka @ sigma @ ka.conj().T
    p_bob = float(np.trace(sigma).real)
    p = float(np.trace(tau).real)
    if p < NULL_BRANCH_TOL:
        return OutcomeRecord(i, j, 0.0, None, p_bob)
    return OutcomeRecord(i, j, p, DensityMatrix(tau / p, CANONICAL, validate=False), p_bob)


def total_probability(records: Sequence[OutcomeRecord]) -> float:
    return float(sum(r.joint_probability for r in records))
