"""Negativity-based entanglement quantifiers and the protocol's cost functionals."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import linalg
from .measurement import (
    MeasurementSet,
    OutcomeRecord,
    apply_protocol,
    bob_round,
    total_probability,
)
from .states import DensityMatrix

NEGATIVITY_CLAMP = 1e-12
PPT_TOL = 1e-10
NORMALIZATION_TOL = 1e-10


@dataclass(frozen=True)
class Bipartition:
    side_one: tuple[str, ...]
    side_two: tuple[str, ...]

    def __post_init__(self):
        one, two = tuple(self.side_one), tuple(self.side_two)
        if not one or not two:
            raise ValueError("both sides of a bipartition must be non-empty")
        if set(one) & set(two):
            raise ValueError(f"sides overlap: {one} | {two}")
        if len(set(one)) != len(one) or len(set(two)) != len(two):
            raise ValueError("duplicate label inside a side")
        object.__setattr__(self, "side_one", one)
        object.__setattr__(self, "side_two", two)

    @classmethod
    def parse(cls, text: str) -> "Bipartition":
        """``"AB|C"`` -> ``Bipartition(("A", "B"), ("C",))`` (single-letter labels)."""
        left, sep, right = text.partition("|")
        if not sep:
            raise ValueError(f"expected a cut like 'A|BC', got {text!r}")
        return cls(tuple(left.strip()), tuple(right.strip()))

    @property
    def labels(self) -> tuple[str, ...]:
        return self.side_one + self.side_two

    def swapped(self) -> "Bipartition":
        return Bipartition(self.side_two, self.side_one)

    def validate_for(self, sig: linalg.DimSignature) -> None:
        if sorted(self.labels) != sorted(sig.labels):
            raise ValueError(f"cut {self} does not partition the labels {sig.labels}")

    def dims(self, sig: linalg.DimSignature) -> tuple[int, int]:
        return sig.dim_of(self.side_one), sig.dim_of(self.side_two)

    def __str__(self):
        return "".join(self.side_one) + "|" + "".join(self.side_two)


CUT_AB = Bipartition(("A",), ("B",))
CUT_AC = Bipartition(("A",), ("C",))
CUT_BC = Bipartition(("B",), ("C",))
CUT_AB_C = Bipartition(("A", "B"), ("C",))
CUT_A_BC = Bipartition(("A",), ("B", "C"))
CUT_B_AC = Bipartition(("B",), ("A", "C"))


def _as_cut(cut) -> Bipartition:
    return Bipartition.parse(cut) if isinstance(cut, str) else cut


def restrict(rho: DensityMatrix, cut: Bipartition) -> DensityMatrix:
    """Trace out every subsystem the cut does not mention."""
    extra = [lb for lb in rho.sig.labels if lb not in cut.labels]
    return rho.reduce(extra) if extra else rho


def _pt_stack(states: Sequence[DensityMatrix], cut: Bipartition) -> tuple[np.ndarray, int]:
    sig = states[0].sig
    cut.validate_for(sig)
    d = min(cut.dims(sig))
    if d < 2:
        raise ValueError(f"cut {cut} has a one-dimensional side")
    for s in states:
        if s.sig != sig:
            raise ValueError("all states in a batch must share one signature")
    pts = np.stack([linalg.partial_transpose(s.matrix, sig, cut.side_two) for s in states])
    return pts, d


def negativities(states: Sequence[DensityMatrix], cut) -> np.ndarray:
    """Negativity of each state (all on one signature) with one batched eigensolve."""
    cut = _as_cut(cut)
    if not states:
        return np.zeros(0)
    pts, d = _pt_stack(states, cut)
    norms = np.sum(np.abs(linalg.hermitian_eigenvalues(pts)), axis=-1)
    vals = (norms - 1.0) / (d - 1)
    return np.where(vals < NEGATIVITY_CLAMP, 0.0, vals)


def negativity(rho: DensityMatrix, cut) -> float:
    """``(||rho^T||_1 - 1) / (d - 1)`` with ``d`` the smaller side dimension."""
    return float(negativities([rho], cut)[0])


def min_pt_eigenvalue(rho: DensityMatrix, cut) -> float:
    pts, _ = _pt_stack([rho], _as_cut(cut))
    return float(linalg.hermitian_eigenvalues(pts[0])[0])


def is_ppt(rho: DensityMatrix, cut) -> bool:
    return min_pt_eigenvalue(rho, cut) >= -PPT_TOL


def realign(rho: np.ndarray, dims: tuple[int, int] = (3, 3)) -> np.ndarray:
    """``R[(i,k),(j,l)] = rho[(i,j),(k,l)]``."""
    da, db = dims
    return np.asarray(rho).reshape(da, db, da, db).transpose(0, 2, 1, 3).reshape(da * da, db * db)


def realignment_witness(rho: DensityMatrix) -> float:
    """Trace norm of the realigned matrix minus one.

    Positive values certify entanglement; non-positive values say nothing.
    """
    if rho.sig.dims != (3, 3):
        raise ValueError(f"realignment witness expects a 3x3 state, got {rho.sig}")
    r = realign(rho.matrix, (3, 3))
    # the Hermitian dilation [[0, R], [R^dag, 0]] has eigenvalues +-s_k, so its
    # trace norm is twice that of R; avoids square roots of roundoff-level zeros
    z = np.zeros_like(r)
    dilation = np.block([[z, r], [r.conj().T, z]])
    return float(linalg.trace_norm(dilation) / 2.0 - 1.0)


def _check_normalized(records: Sequence[OutcomeRecord]) -> None:
    total = total_probability(records)
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise ValueError(f"branch probabilities sum to {total:.15g}, not 1")


def branch_negativities(records: Sequence[OutcomeRecord], cut) -> list[float | None]:
    """Per-branch negativity across ``cut`` (``None`` for null branches)."""
    cut = _as_cut(cut)
    live = [k for k, r in enumerate(records) if not r.is_null]
    vals = negativities([restrict(records[k].state, cut) for k in live], cut) if live else []
    out: list[float | None] = [None] * len(records)
    for k, v in zip(live, vals):
        out[k] = float(v)
    return out


def average_negativity(records: Sequence[OutcomeRecord], cut) -> float:
    _check_normalized(records)
    negs = branch_negativities(records, cut)
    return float(sum(r.joint_probability * n for r, n in zip(records, negs) if n is not None))


@dataclass(frozen=True)
class CostTerm:
    stage: str  # "BC" for Bob's round, "AC" for Alice's round
    outcome: tuple[int, ...]
    probability: float
    negativity: float

    @property
    def contribution(self) -> float:
        return self.probability * self.negativity


@dataclass(frozen=True)
class CostBreakdown:
    m_cost: float
    avg_negativity_ab: float
    per_outcome_terms: tuple[CostTerm, ...] = field(default=())
    weighting: str = "joint"

    @property
    def e_cost(self) -> float:
        return self.m_cost - self.avg_negativity_ab


def measurement_cost(
    chi: DensityMatrix,
    mset: MeasurementSet,
    ancilla: DensityMatrix,
    *,
    weighting: str = "joint",
    alice_mset: MeasurementSet | None = None,
    records: Sequence[OutcomeRecord] | None = None,
) -> CostBreakdown:
    """Entanglement each round creates between the measured party and the ancilla.

    Bob's term weights the B|C negativity after his round by his outcome
    probability.  Alice's term weights the A|C negativity after both rounds by
    the joint probability p(i, j) (``weighting="joint"``) or by p(j | i)
    (``weighting="conditional"``).  ``records`` may be passed to reuse an
    existing :func:`apply_protocol` run on the same inputs.
    """
    if weighting not in ("joint", "conditional"):
        raise ValueError("weighting must be 'joint' or 'conditional'")
    if records is None:
        records = apply_protocol(chi, mset, ancilla, alice_mset)
    _check_normalized(records)

    terms: list[CostTerm] = []
    bob = bob_round(chi, mset, ancilla)
    live = [b for b in bob if b.state is not None]
    bob_negs = negativities([restrict(b.state, CUT_BC) for b in live], CUT_BC) if live else []
    for b, n in zip(live, bob_negs):
        terms.append(CostTerm("BC", (b.outcome,), b.probability, float(n)))

    ac = branch_negativities(records, CUT_AC)
    for r, n in zip(records, ac):
        if n is None:
            continue
        w = r.joint_probability if weighting == "joint" else r.alice_conditional_probability
        terms.append(CostTerm("AC", r.outcome, w, n))

    avg_ab = average_negativity(records, CUT_AB)
    m_cost = float(sum(t.contribution for t in terms))
    return CostBreakdown(m_cost, avg_ab, tuple(terms), weighting)


TRIPARTITE_MODES = ("square_of_average", "average_of_squares")


def tripartite_components(records: Sequence[OutcomeRecord]) -> dict[str, float]:
    """Averaged negativities across AB|C, A|C and B|C."""
    _check_normalized(records)
    return {str(cut): average_negativity(records, cut) for cut in (CUT_AB_C, CUT_AC, CUT_BC)}


def tripartite_entanglement(records: Sequence[OutcomeRecord], mode: str = "square_of_average") -> float:
    """Monogamy residual ``N(AB|C)^2 - N(A|C)^2 - N(B|C)^2`` over the ensemble.

    ``square_of_average`` squares the probability-averaged negativities;
    ``average_of_squares`` averages the squared branch negativities instead.
    """
    if mode not in TRIPARTITE_MODES:
        raise ValueError(f"mode must be one of {TRIPARTITE_MODES}")
    _check_normalized(records)
    if mode == "square_of_average":
        comp = tripartite_components(records)
        return comp["AB|C"] ** 2 - comp["A|C"] ** 2 - comp["B|C"] ** 2
    total = 0.0
    negs = [branch_negativities(records, cut) for cut in (CUT_AB_C, CUT_AC, CUT_BC)]
    for r, n_abc, n_ac, n_bc in zip(records, *negs):
        if n_abc is not None:
            total += r.joint_probability * (n_abc**2 - n_ac**2 - n_bc**2)
    return total


def cut_dims(cut, sig: linalg.DimSignature = linalg.CANONICAL) -> tuple[int, int]:
    return _as_cut(cut).dims(sig)


def iter_cuts() -> Iterable[Bipartition]:
    return (CUT_AB, CUT_AC, CUT_BC, CUT_AB_C, CUT_A_BC, CUT_B_AC)
