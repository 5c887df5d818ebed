"""Invariant suite behind ``weakdistill verify``.

Module-level invariants run first, then the acceptance criteria.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from . import acceptance, linalg, measurement, measures, states
from .acceptance import CheckResult, timed
from .linalg import CANONICAL
from .measurement import MeasurementParams, make_measurement_set
from .measures import CUT_AB

_RNG_SEED = 1234


def random_density(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def _ok(cond: bool, detail: str) -> tuple[bool, str, dict]:
    return bool(cond), detail, {}


@timed("linalg.tensor_associativity")
def tensor_associativity():
    rng = np.random.default_rng(_RNG_SEED)
    a, b, c = (random_density(d, rng) for d in (3, 3, 2))
    err = np.max(np.abs(linalg.tensor(linalg.tensor(a, b), c) - linalg.tensor(a, linalg.tensor(b, c))))
    return _ok(err <= 1e-12, f"max difference {err:.1e}")


@timed("linalg.embed_identity")
def embed_identity():
    worst = 0.0
    for labels in (["A"], ["B"], ["C"], ["A", "B"], ["A", "C"], ["B", "C"], ["C", "A"], ["A", "B", "C"]):
        op = np.eye(CANONICAL.dim_of(labels))
        worst = max(worst, float(np.max(np.abs(linalg.embed_operator(op, labels, CANONICAL) - np.eye(18)))))
    return _ok(worst <= 1e-12, f"max deviation {worst:.1e}")


@timed("linalg.trace_embed_consistency")
def trace_embed_consistency():
    rng = np.random.default_rng(_RNG_SEED + 1)
    worst = 0.0
    for labels in (["A", "C"], ["B", "C"], ["A", "B"], ["B"]):
        d = CANONICAL.dim_of(labels)
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        op = g + g.conj().T
        rho = random_density(18, rng)
        lhs = np.trace(linalg.embed_operator(op, labels, CANONICAL) @ rho)
        rest = [lb for lb in CANONICAL.labels if lb not in labels]
        rhs = np.trace(op @ linalg.partial_trace(rho, CANONICAL, rest))
        worst = max(worst, abs(lhs - rhs))
    return _ok(worst <= 1e-10, f"max |Tr[E(op) rho] - Tr[op rho_S]| = {worst:.1e}")


@timed("linalg.partial_transpose_involution")
def partial_transpose_involution():
    rng = np.random.default_rng(_RNG_SEED + 2)
    rho = random_density(18, rng)
    worst = 0.0
    for labels in (["A"], ["B"], ["C"], ["A", "B"]):
        once = linalg.partial_transpose(rho, CANONICAL, labels)
        worst = max(worst, float(np.max(np.abs(linalg.partial_transpose(once, CANONICAL, labels) - rho))))
        worst = max(worst, abs(np.trace(once) - 1.0), linalg.hermiticity_error(once))
    return _ok(worst <= 1e-12, f"max deviation {worst:.1e}")


@timed("linalg.jacobi_recovers_spectrum")
def jacobi_recovers_spectrum():
    rng = np.random.default_rng(_RNG_SEED + 3)
    worst = 0.0
    for n in (2, 3, 6, 9, 18):
        d = np.sort(rng.normal(size=n))
        q = random_unitary(n, rng)
        worst = max(worst, float(np.max(np.abs(linalg.hermitian_eigenvalues(q @ np.diag(d) @ q.conj().T) - d))))
    return _ok(worst <= 1e-8, f"max eigenvalue error {worst:.1e}")


@timed("linalg.phi_plus_partial_transpose")
def phi_plus_partial_transpose():
    pt = linalg.partial_transpose(states.phi_plus().projector(), states.AB, "B")
    ev = linalg.hermitian_eigenvalues(pt)
    expect = np.array([-1 / 3] * 3 + [1 / 3] * 6)
    return _ok(np.max(np.abs(ev - expect)) <= 1e-12 and abs(linalg.trace_norm(pt) - 3) <= 1e-12, f"spectrum {ev[0]:.6f}..{ev[-1]:.6f}, trace norm {linalg.trace_norm(pt):.6f}")


@timed("states.chi1_support")
def chi1_support():
    chi = states.make_chi1()
    overlaps = [abs(np.vdot(k.vector, chi.matrix @ k.vector)) for k in states.tiles_vectors()]
    return _ok(chi.rank() == 4 and max(overlaps) < 1e-12 and abs(chi.trace() - 1) < 1e-12,
               f"rank {chi.rank()}, max <psi|chi1|psi> {max(overlaps):.1e}")


@timed("states.tiles_orthonormal")
def tiles_orthonormal():
    t = states.tiles_vectors()
    gram = np.array([[u.inner(v) for v in t] for u in t])
    err = float(np.max(np.abs(gram - np.eye(5))))
    return _ok(err <= 1e-12, f"max Gram deviation {err:.1e}")


@timed("states.chi2_matrix_entries")
def chi2_matrix_entries():
    m = states.make_chi2(0.5).matrix
    ok = abs(m[0, 0] - 0.1) < 1e-15 and abs(m[6, 8] - math.sqrt(3) / 20) < 1e-15 and abs(np.trace(m) - 1) < 1e-12
    return _ok(ok, f"(0,0)={m[0, 0].real:.6g}, (6,8)={m[6, 8].real:.6g}")


@timed("states.families_valid_on_grid")
def families_valid_on_grid():
    bad = []
    for a in np.linspace(0, 1, 101):
        try:
            states.make_chi2(a).check()
        except states.StateError as exc:
            bad.append(f"chi2({a:.2f}): {exc}")
    for b in np.linspace(2, 5, 101):
        try:
            states.make_chi3(b).check()
        except states.StateError as exc:
            bad.append(f"chi3({b:.2f}): {exc}")
    return _ok(not bad, "; ".join(bad[:3]) or "202 states valid")


@timed("states.chi3_monotone_beyond_4")
def chi3_monotone():
    bs = np.linspace(4.0, 5.0, 101)[1:]
    n = measures.negativities([states.make_chi3(b) for b in bs], CUT_AB)
    return _ok(bool(np.all(np.diff(n) > 0)), f"N from {n[0]:.3e} to {n[-1]:.3e}")


@timed("measurement.projectors")
def projectors():
    p1, p2, p3 = measurement.make_projectors(0.3)
    worst = max(float(np.max(np.abs(p @ q))) for p, q in ((p1, p2), (p1, p3), (p2, p3)))
    idem = max(float(np.max(np.abs(p @ p - p))) for p in (p1, p2, p3))
    ranks = tuple(int(round(np.trace(p).real)) for p in (p1, p2, p3))
    ok = worst < 1e-12 and idem < 1e-12 and ranks == (4, 1, 1) and np.max(np.abs(p1 + p2 + p3 - np.eye(6))) < 1e-12
    return _ok(ok, f"ranks {ranks}, max cross product {worst:.1e}")


@timed("measurement.strong_channel_idempotent")
def strong_idempotent():
    rng = np.random.default_rng(_RNG_SEED + 4)
    worst = 0.0
    for _ in range(20):
        rho = states.DensityMatrix(random_density(6, rng), measurement.QUBIT_PAIR)
        once = measurement.strong_channel(rho, 0.4)
        twice = measurement.strong_channel(once, 0.4)
        worst = max(worst, float(np.max(np.abs(twice.matrix - once.matrix))), abs(once.trace() - 1))
    return _ok(worst <= 1e-12, f"max deviation {worst:.1e}")


@timed("measurement.protocol_normalized_and_sequential")
def protocol_normalized():
    chi = states.make_chi1()
    worst = 0.0
    for x in (0.0, 0.2, 1.0):
        ms = make_measurement_set(MeasurementParams(x))
        recs = measurement.apply_protocol(chi, ms, states.make_ancilla())
        worst = max(worst, abs(measurement.total_probability(recs) - 1))
        bob = measurement.bob_round(chi, ms, states.make_ancilla())
        for b in bob:
            marg = sum(r.joint_probability for r in recs if r.bob_outcome == b.outcome)
            worst = max(worst, abs(marg - b.probability))
            if b.state is None:
                continue
            for r in recs:
                if r.bob_outcome != b.outcome:
                    continue
                ka = linalg.embed_operator(ms.operator(r.alice_outcome), ["A", "C"], CANONICAL)
                cond = float(np.trace(ka @ b.state.matrix @ ka).real)
                worst = max(worst, abs(r.joint_probability - b.probability * cond))
    return _ok(worst <= 1e-10, f"max deviation {worst:.1e}")


@timed("measurement.beta_half_first_outcome_is_product_diagonal")
def beta_half_structure():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", measurement.DegeneracyWarning)
        m1 = [make_measurement_set(MeasurementParams(0.4, 0.5, al)).operator(1) for al in (0.2, 0.5, 0.9)]
    offdiag = max(float(np.max(np.abs(m - np.diag(np.diagonal(m))))) for m in m1)
    spread = max(float(np.max(np.abs(m - m1[0]))) for m in m1)
    return _ok(offdiag < 1e-12 and spread < 1e-12, f"off-diagonal {offdiag:.1e}, alpha dependence {spread:.1e}")


@timed("measures.side_symmetry")
def side_symmetry():
    rng = np.random.default_rng(_RNG_SEED + 5)
    worst = 0.0
    for _ in range(10):
        rho = states.DensityMatrix(random_density(18, rng), CANONICAL)
        for cut in (measures.CUT_AB_C, measures.CUT_A_BC, measures.CUT_B_AC):
            worst = max(worst, abs(measures.negativity(rho, cut) - measures.negativity(rho, cut.swapped())))
    return _ok(worst <= 1e-10, f"max asymmetry {worst:.1e}")


@timed("measures.local_unitary_invariance")
def local_unitary_invariance():
    rng = np.random.default_rng(_RNG_SEED + 6)
    worst = 0.0
    for _ in range(10):
        g = rng.normal(size=(9, 2)) + 1j * rng.normal(size=(9, 2))
        rho = g @ g.conj().T
        rho = rho / np.trace(rho)
        u = np.kron(random_unitary(3, rng), random_unitary(3, rng))
        n0 = measures.negativity(states.DensityMatrix(rho, states.AB), CUT_AB)
        n1 = measures.negativity(states.DensityMatrix(u @ rho @ u.conj().T, states.AB), CUT_AB)
        worst = max(worst, abs(n0 - n1))
    return _ok(worst <= 1e-9, f"max change {worst:.1e}")


@timed("measures.negativity_iff_npt")
def negativity_iff_npt():
    rng = np.random.default_rng(_RNG_SEED + 7)
    mismatches = 0
    samples = [states.make_chi1(), states.make_chi2(0.3), states.make_chi3(4.5), states.phi_plus().density_matrix()]
    for _ in range(10):
        samples.append(states.DensityMatrix(random_density(9, rng), states.AB))
    for s in samples:
        if (measures.negativity(s, CUT_AB) == 0) != measures.is_ppt(s, CUT_AB):
            mismatches += 1
    return _ok(mismatches == 0, f"{mismatches} mismatches over {len(samples)} states")


@timed("measures.cost_identity")
def cost_identity():
    chi = states.make_chi2(0.5)
    cost = measures.measurement_cost(chi, make_measurement_set(MeasurementParams(0.6)), states.make_ancilla())
    parts = sum(t.contribution for t in cost.per_outcome_terms)
    ok = abs(parts - cost.m_cost) <= 1e-15 and cost.e_cost == cost.m_cost - cost.avg_negativity_ab
    return _ok(ok, f"M_cost {cost.m_cost:.6g}, E_cost {cost.e_cost:.6g}")


MODULE_CHECKS = [
    tensor_associativity,
    embed_identity,
    trace_embed_consistency,
    partial_transpose_involution,
    jacobi_recovers_spectrum,
    phi_plus_partial_transpose,
    chi1_support,
    tiles_orthonormal,
    chi2_matrix_entries,
    families_valid_on_grid,
    chi3_monotone,
    projectors,
    strong_idempotent,
    protocol_normalized,
    beta_half_structure,
    side_symmetry,
    local_unitary_invariance,
    negativity_iff_npt,
    cost_identity,
]


def all_checks() -> list:
    return MODULE_CHECKS + acceptance.CRITERIA


def run(include_acceptance: bool = True) -> list[CheckResult]:
    checks = all_checks() if include_acceptance else MODULE_CHECKS
    return [c() for c in checks]


def format_table(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  status  seconds  detail"]
    for r in results:
        lines.append(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL':<6}  {r.seconds:7.2f}  {r.detail}")
    failed = sum(not r.passed for r in results)
    lines.append(f"{len(results) - failed}/{len(results)} checks passed")
    return "\n".join(lines)
