import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weakdistill import linalg, measurement, measures, states
from weakdistill.measurement import (
    DegeneracyWarning,
    MeasurementParams,
    NullBranchError,
    apply_protocol,
    make_measurement_set,
    make_projectors,
)
from weakdistill.measures import CUT_AB, CUT_BC

R2 = 1 / math.sqrt(2)
xs = st.floats(min_value=0.0, max_value=1.0)
open_unit = st.floats(min_value=0.01, max_value=0.99).filter(lambda v: abs(v - 0.5) > 1e-9)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def mset(x, beta=0.1, alpha=R2):
    return make_measurement_set(MeasurementParams(x, beta, alpha))


# --- params ---------------------------------------------------------------


@settings(max_examples=50, deadline=None)
@given(xs, open_unit)
def test_epsilons_unit_norm(x, beta):
    eps = MeasurementParams(x, beta, R2).epsilons
    assert abs(sum(e * e for e in eps) - 1) < 1e-12


@pytest.mark.parametrize("kw", [dict(x=-0.1), dict(x=1.1), dict(beta=0.0), dict(beta=1.0), dict(alpha=0.0), dict(alpha=1.0)])
def test_params_range_errors(kw):
    args = dict(x=0.5, beta=0.1, alpha=R2) | kw
    with pytest.raises(ValueError):
        MeasurementParams(**args)


# --- projectors -------------------------------------------------------------


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=0.01, max_value=0.99))
def test_projectors_orthogonal_resolution(alpha):
    ps = make_projectors(alpha)
    assert linalg.allclose(sum(ps), np.eye(6))
    for a in range(3):
        assert linalg.allclose(ps[a] @ ps[a], ps[a])
        for b in range(a + 1, 3):
            assert np.max(np.abs(ps[a] @ ps[b])) < 1e-12
    assert abs(measurement.phi_ket(alpha).inner(measurement.psi_ket(alpha))) < 1e-15


def test_projector_ranks():
    ranks = [np.linalg.matrix_rank(p, tol=1e-10) for p in make_projectors(0.3)]
    assert ranks == [4, 1, 1]


def test_projector_kets_in_00_11_plane():
    phi = measurement.phi_ket(0.6).vector
    psi = measurement.psi_ket(0.6).vector
    # |00'> is index 0 and |11'> is index 3 in the qutrit-major 3x2 space
    assert np.allclose(phi, [0.6, 0, 0, 0.8, 0, 0])
    assert np.allclose(psi, [0.8, 0, 0, -0.6, 0, 0])


def test_maximal_projector_entanglement_at_half():
    phi = states.Ket(measurement.phi_ket(R2).vector, measurement.QUBIT_PAIR).density_matrix()
    ev = phi.reduce("C").eigenvalues()
    assert np.allclose(ev, [0, 0.5, 0.5], atol=1e-12)


@pytest.mark.parametrize("alpha", [0.0, 1.0])
def test_projectors_reject_boundary_alpha(alpha):
    with pytest.raises(ValueError):
        make_projectors(alpha)


# --- measurement set --------------------------------------------------------


def test_operator_table_follows_cyclic_rule():
    ms = mset(0.35, 0.2, 0.4)
    e1, e2, e3 = ms.params.epsilons
    p1, p2, p3 = ms.projectors
    assert linalg.allclose(ms.operator(1), e1 * p1 + e2 * p2 + e3 * p3)
    assert linalg.allclose(ms.operator(2), e2 * p1 + e3 * p2 + e1 * p3)
    assert linalg.allclose(ms.operator(3), e3 * p1 + e1 * p2 + e2 * p3)


def test_strong_limit():
    ms = mset(1.0)
    assert ms.params.epsilons == (1.0, 0.0, 0.0)
    assert ms.zeta == 0.0
    p1, p2, p3 = ms.projectors
    assert linalg.allclose(ms.operator(1), p1)
    assert linalg.allclose(ms.operator(2), p3)
    assert linalg.allclose(ms.operator(3), p2)


def test_zeta_at_x0():
    assert abs(mset(0.0).zeta - 0.3) < 1e-12
    assert abs(measurement.weakness(0.0, 0.4) - math.sqrt(0.24)) < 1e-12


def test_completeness_example():
    assert linalg.allclose(mset(0.7).completeness(), np.eye(6))


@settings(max_examples=60, deadline=None)
@given(xs, open_unit, st.floats(min_value=0.01, max_value=0.99))
def test_completeness_and_psd(x, beta, alpha):
    ms = mset(x, beta, alpha)
    assert np.max(np.abs(ms.completeness() - np.eye(6))) < 1e-12
    for m in ms.operators:
        assert linalg.is_hermitian(m)
        assert linalg.hermitian_eigenvalues(m)[0] >= -1e-12


def test_beta_half_warns():
    with pytest.warns(DegeneracyWarning):
        mset(0.5, 0.5)


# --- weakness profile --------------------------------------------------------


def test_weakness_profile_endpoints_and_symmetry():
    grid = np.linspace(0, 1, 51)
    for beta in (0.1, 0.2, 0.3, 0.4):
        prof = measurement.weakness_profile(beta, grid)
        mirror = measurement.weakness_profile(1 - beta, grid)
        assert prof[-1][1] == 0.0
        assert abs(prof[0][1] - math.sqrt(beta * (1 - beta))) < 1e-12
        assert max(abs(a[1] - b[1]) for a, b in zip(prof, mirror)) < 1e-12


def test_weakness_profile_rejects_grid_outside_unit():
    with pytest.raises(ValueError):
        measurement.weakness_profile(0.1, [0.0, 1.5])


# --- channels ----------------------------------------------------------------


def rand_density(d, rng):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    r = g @ g.conj().T
    return r / np.trace(r)


def test_strong_channel_fixed_points():
    p2 = make_projectors(R2)[1]
    rho = rand_density(6, np.random.default_rng(0))
    proj = p2 @ rho @ p2
    proj /= np.trace(proj)
    assert linalg.allclose(measurement.strong_channel(proj, R2), proj)
    assert linalg.allclose(measurement.strong_channel(np.eye(6) / 6, R2), np.eye(6) / 6)


def test_strong_channel_on_density_matrix_type():
    rho = states.DensityMatrix(rand_density(6, np.random.default_rng(1)), measurement.QUBIT_PAIR)
    out = measurement.strong_channel(rho, 0.3)
    assert isinstance(out, states.DensityMatrix)
    assert abs(out.trace() - 1) < 1e-12
    with pytest.raises(ValueError):
        measurement.strong_channel(np.eye(9) / 9, 0.3)


def test_strong_channel_trace_preserving_idempotent():
    rng = np.random.default_rng(2)
    for _ in range(100):
        rho = rand_density(6, rng)
        once = measurement.strong_channel(rho, 0.4)
        assert abs(np.trace(once) - 1) < 1e-12
        assert linalg.allclose(measurement.strong_channel(once, 0.4), once)


@settings(max_examples=40, deadline=None)
@given(xs, open_unit, st.floats(min_value=0.01, max_value=0.99), seeds)
def test_weak_channel_decomposition(x, beta, alpha, seed):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    herm = g + g.conj().T
    ms = mset(x, beta, alpha)
    lhs = measurement.weak_channel(herm, ms)
    rhs = (1 - ms.zeta) * measurement.strong_channel(herm, alpha) + ms.zeta * herm
    assert np.max(np.abs(lhs - rhs)) < 1e-10


# --- protocol application ---------------------------------------------------


def test_protocol_normalized_and_ordered():
    recs = apply_protocol(states.make_chi1(), mset(0.2), states.make_ancilla())
    assert [r.outcome for r in recs] == [(i, j) for i in (1, 2, 3) for j in (1, 2, 3)]
    assert abs(measurement.total_probability(recs) - 1) < 1e-10
    for r in recs:
        r.state.check()


def test_sequential_consistency():
    chi, anc, ms = states.make_chi1(), states.make_ancilla(), mset(0.2)
    recs = apply_protocol(chi, ms, anc)
    bobs = measurement.bob_round(chi, ms, anc)
    for r in recs:
        bob = bobs[r.bob_outcome - 1]
        ka = linalg.embed_operator(ms.operator(r.alice_outcome), ["A", "C"], linalg.CANONICAL)
        cond = float(np.trace(ka @ bob.state.matrix @ ka).real)
        assert abs(r.bob_probability - bob.probability) < 1e-14
        assert abs(r.joint_probability - bob.probability * cond) < 1e-12
        assert abs(r.alice_conditional_probability - cond) < 1e-12


@pytest.mark.parametrize("name,param", [("chi1", None), ("chi2", 0.25), ("chi3", 3.5)])
@pytest.mark.parametrize("x", [0.0, 0.3, 1.0])
def test_marginals_and_boundaries(name, param, x):
    chi = states.StateSpec(name, param).build()
    recs = apply_protocol(chi, mset(x), states.make_ancilla())
    assert abs(measurement.total_probability(recs) - 1) < 1e-10
    for i in (1, 2, 3):
        row = [r for r in recs if r.bob_outcome == i]
        assert abs(sum(r.joint_probability for r in row) - row[0].bob_probability) < 1e-10


def test_chi1_all_branches_npt_at_x_02():
    recs = apply_protocol(states.make_chi1(), mset(0.2), states.make_ancilla())
    negs = measures.branch_negativities(recs, CUT_AB)
    assert all(n is not None and n > 0 for n in negs)


def test_null_branches_kept_or_raised():
    # strong limit on chi2(0): the product state leaves some branches empty
    chi = states.make_chi2(0.0)
    recs = apply_protocol(chi, mset(1.0), states.make_ancilla())
    nulls = [r for r in recs if r.is_null]
    assert nulls and all(r.joint_probability == 0.0 for r in nulls)
    assert abs(measurement.total_probability(recs) - 1) < 1e-10
    with pytest.raises(NullBranchError):
        apply_protocol(chi, mset(1.0), states.make_ancilla(), on_null="raise")


def test_branch_record_matches_full_protocol():
    chi, anc, ms = states.make_chi2(0.5), states.make_ancilla(), mset(0.4)
    full = {r.outcome: r for r in apply_protocol(chi, ms, anc)}
    for k in ((1, 3), (3, 2)):
        one = measurement.branch_record(chi, ms, anc, k)
        assert abs(one.joint_probability - full[k].joint_probability) < 1e-15
        assert linalg.allclose(one.state.matrix, full[k].state.matrix)


def test_separate_alice_parameters():
    chi, anc = states.make_chi1(), states.make_ancilla()
    same = apply_protocol(chi, mset(0.3), anc, alice_mset=mset(0.3))
    default = apply_protocol(chi, mset(0.3), anc)
    other = apply_protocol(chi, mset(0.3), anc, alice_mset=mset(0.3, 0.2, 0.4))
    assert all(abs(a.joint_probability - b.joint_probability) < 1e-15 for a, b in zip(same, default))
    assert max(abs(a.joint_probability - b.joint_probability) for a, b in zip(same, other)) > 1e-4
    assert abs(measurement.total_probability(other) - 1) < 1e-10


def test_protocol_rejects_wrong_signature():
    with pytest.raises(ValueError):
        apply_protocol(states.make_ancilla(), mset(0.3), states.make_ancilla())


# --- beta = 1/2 ----------------------------------------------------------------


def test_beta_half_first_outcome_acts_diagonally_and_independent_of_alpha():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegeneracyWarning)
        for x in np.linspace(0, 1, 11):
            m_a = mset(x, 0.5, 0.3).operator(1)
            m_b = mset(x, 0.5, 0.8).operator(1)
            assert linalg.allclose(m_a, m_b)
            assert linalg.allclose(m_a, np.diag(np.diag(m_a)))


def test_beta_half_first_outcome_on_maximally_mixed_marginal():
    # chi3 has a maximally mixed B marginal; the diagonal M_1 cannot then entangle B with C
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegeneracyWarning)
        chi = states.make_chi3(3.5)
        for x in np.linspace(0, 1, 21):
            bob = measurement.bob_round(chi, mset(x, 0.5), states.make_ancilla())[0]
            assert measures.negativity(bob.state.keep(["B", "C"]), CUT_BC) < 1e-10
