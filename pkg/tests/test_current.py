import dataclasses

import numpy as np
import pytest

from lindcur import (
    DimensionMismatch,
    IndexOutOfRange,
    PointwiseUndefined,
    StepTooCoarse,
    WhiteNoise,
    apply_adjoint,
    build_engine,
    continuity_report,
    decompose,
    discrete_divergence,
    divergence_identity_check,
    evolve,
    jd_cumulative_1d,
    jd_expectation,
    jd_finite_time_oracle,
    jd_observable,
    lstar_density,
)
from lindcur.current import jd_observables
from lindcur.lattice import ChainSpec, build_chain

from conftest import make_bundle, random_density

# cross-checked against the running-sum construction and the finite-time
# quadrature; the initial state is the site-0 projector
REF4_SITE0_JD = np.array([0.02412327, 0.01753454, 0.0109458])


def _site_projector(n, r=0):
    rho = np.zeros((n, n), dtype=complex)
    rho[r, r] = 1.0
    return rho


def _two_level_state(eig):
    psi = (eig.basis[:, 0] + np.exp(1j * np.pi / 4.0) * eig.basis[:, 1]) / np.sqrt(2.0)
    return np.outer(psi, psi.conj())


def test_constraint_sets_satisfy_their_selection_rules(ref4):
    w = ref4.spectrum.frequencies
    tol = ref4.spectrum.bin_tolerance
    assert len(ref4.engine.first_index) == 40
    assert len(ref4.engine.second_index) == 72
    for aj, a1, a2, ar in ref4.engine.first_index:
        assert abs(w[aj] + w[a1] - w[a2]) <= tol
        assert abs(w[ar]) <= tol
        assert abs(w[aj]) > tol
    for aj, a1, a2, ar in ref4.engine.second_index:
        assert abs(w[a1] - w[a2]) <= tol
        assert abs(w[aj] + w[ar]) <= tol
        assert abs(w[aj]) > tol


def test_two_level_first_set_contains_expected_quadruple(two_level):
    w = two_level.spectrum.frequencies
    quadruple_values = {
        (w[aj], w[a1], w[a2], w[ar]) for aj, a1, a2, ar in two_level.engine.first_index
    }
    assert (10.0, 0.0, 10.0, 0.0) in quadruple_values


def test_identity_coupling_evaluates_to_zero(rng):
    bundle = make_bundle(3, np.ones(3))
    for _ in range(5):
        np.testing.assert_allclose(
            jd_expectation(bundle.engine, random_density(rng, 3)), 0.0, atol=1e-15
        )


def test_mixed_state_carries_no_dissipative_current(ref4):
    np.testing.assert_allclose(
        jd_expectation(ref4.engine, np.eye(4, dtype=complex) / 4.0), 0.0, atol=1e-14
    )


def test_site_projector_reference_values(ref4):
    je = jd_expectation(ref4.engine, _site_projector(4))
    np.testing.assert_allclose(je, REF4_SITE0_JD, rtol=1e-5)


def test_spectral_matches_running_sum(ref4, rng):
    for _ in range(10):
        rho = random_density(rng, 4)
        je = jd_expectation(ref4.engine, rho)
        jc = jd_cumulative_1d(ref4.generator, ref4.ops, rho)
        np.testing.assert_allclose(je, jc, atol=1e-11)


def test_expectation_is_linear(ref4, rng):
    a = 0.3
    rho1, rho2 = random_density(rng, 4), random_density(rng, 4)
    mixed = a * rho1 + (1.0 - a) * rho2
    np.testing.assert_allclose(
        jd_expectation(ref4.engine, mixed),
        a * jd_expectation(ref4.engine, rho1)
        + (1.0 - a) * jd_expectation(ref4.engine, rho2),
        atol=1e-11,
    )


def test_observable_reproduces_expectation(ref4, rng):
    stack = jd_observables(ref4.engine)
    assert stack.shape == (3, 4, 4)
    for _ in range(50):
        rho = random_density(rng, 4)
        je = jd_expectation(ref4.engine, rho)
        via_trace = np.array([np.trace(rho @ O).real for O in stack])
        np.testing.assert_allclose(via_trace, je, atol=1e-11)


def test_observables_are_hermitian(ref4):
    for b in range(3):
        O = jd_observable(ref4.engine, b)
        np.testing.assert_allclose(O, O.conj().T, atol=1e-10)


def test_observable_zero_for_identity_coupling():
    bundle = make_bundle(3, np.ones(3))
    for b in range(2):
        assert np.max(np.abs(jd_observable(bundle.engine, b))) <= 1e-14


def test_observable_bond_bounds(ref4):
    with pytest.raises(IndexOutOfRange):
        jd_observable(ref4.engine, 3)
    with pytest.raises(IndexOutOfRange):
        jd_observable(ref4.engine, -1)


def test_expectation_depends_only_on_its_bond(ref4, rng):
    rho = random_density(rng, 4)
    base = jd_expectation(ref4.engine, rho)
    doubled = dataclasses.replace(
        ref4.engine.bond_currents[2],
        source=2.0 * ref4.engine.bond_currents[2].source,
        components=2.0 * ref4.engine.bond_currents[2].components,
    )
    perturbed = dataclasses.replace(
        ref4.engine, bond_currents=ref4.engine.bond_currents[:2] + (doubled,)
    )
    after = jd_expectation(perturbed, rho)
    np.testing.assert_allclose(after[:2], base[:2], atol=1e-15)
    np.testing.assert_allclose(after[2], 2.0 * base[2], atol=1e-13)


def test_lstar_density_matches_adjoint(ref4):
    sources = lstar_density(ref4.generator, ref4.ops)
    for r, L in enumerate(sources):
        np.testing.assert_array_equal(L, apply_adjoint(ref4.generator, ref4.ops.n_ops[r]))
    np.testing.assert_allclose(sum(sources), np.zeros((4, 4)), atol=1e-11)


def test_lstar_density_zero_dissipator(rng):
    bundle = make_bundle(3, np.zeros(3))
    for L in lstar_density(bundle.generator, bundle.ops):
        assert not np.any(L)


def test_dephasing_sources_have_no_diagonal():
    """Site-diagonal coupling with a site-diagonal Hamiltonian only damps
    coherences, so the source operators have empty diagonals."""
    from lindcur import (
        EigenSystem,
        bohr_frequencies,
        build_generator,
        default_freq_tol,
        gplus_table,
    )

    eig = EigenSystem(energies=np.array([0.0, 10.0]), basis=np.eye(2, dtype=complex))
    spectrum = bohr_frequencies(eig, default_freq_tol(eig))
    gplus = gplus_table(WhiteNoise(0.25), spectrum)
    G = build_generator(decompose(np.diag([1.0, -1.0]), eig, spectrum), gplus, eig)
    ops = build_chain(ChainSpec(2, 1.0, np.zeros(2), np.array([1.0, -1.0])))
    for L in lstar_density(G, ops):
        np.testing.assert_allclose(np.diag(L), 0.0, atol=1e-14)


def test_running_sum_boundary_conditions(ref4, rng):
    rho = random_density(rng, 4)
    sources = lstar_density(ref4.generator, ref4.ops)
    rates = np.array([np.trace(rho @ L).real for L in sources])
    # both virtual bonds vanish: the left one by construction, the right
    # one because the sources sum to zero
    assert abs(np.sum(rates)) <= 1e-10
    jc = jd_cumulative_1d(ref4.generator, ref4.ops, rho)
    np.testing.assert_allclose(jc, -np.cumsum(rates)[:-1], atol=1e-13)


def test_finite_time_oracle_converges(two_level):
    rho = _two_level_state(two_level.eig)
    je = jd_expectation(two_level.engine, rho)
    dt = min(1.0, np.pi / 10.0) / 80.0
    jo = jd_finite_time_oracle(
        two_level.ops, two_level.eig, two_level.spectrum, two_level.kernel, rho, 20.0, dt
    )
    assert np.max(np.abs(jo - je)) <= 0.02 * np.max(np.abs(je))


def test_oracle_assembled_observable(two_level):
    """Assembling the observable from oracle values on Hermitian unit
    combinations must reproduce jd_observable within quadrature accuracy."""
    dt = min(1.0, np.pi / 10.0) / 80.0

    def oracle(mat):
        return jd_finite_time_oracle(
            two_level.ops, two_level.eig, two_level.spectrum, two_level.kernel,
            mat, 20.0, dt,
        )[0]

    O = np.zeros((2, 2), dtype=complex)
    for i in range(2):
        unit = np.zeros((2, 2), dtype=complex)
        unit[i, i] = 1.0
        O[i, i] = oracle(unit)
    sym = np.zeros((2, 2), dtype=complex)
    sym[0, 1] = sym[1, 0] = 1.0
    asym = np.zeros((2, 2), dtype=complex)
    asym[0, 1], asym[1, 0] = 1.0j, -1.0j
    s, a = oracle(sym), oracle(asym)
    O[0, 1] = (s + 1.0j * a) / 2.0
    O[1, 0] = np.conj(O[0, 1])
    target = jd_observable(two_level.engine, 0)
    assert np.max(np.abs(O - target)) <= 0.05 * np.max(np.abs(target))


def test_oracle_zero_mode_flag_is_inert_on_chains(two_level):
    rho = _two_level_state(two_level.eig)
    dt = min(1.0, np.pi / 10.0) / 80.0
    args = (two_level.ops, two_level.eig, two_level.spectrum, two_level.kernel, rho, 5.0, dt)
    off = jd_finite_time_oracle(*args, include_zero_mode=False)
    on = jd_finite_time_oracle(*args, include_zero_mode=True)
    np.testing.assert_allclose(on, off, atol=1e-15)


def test_oracle_input_guards(two_level):
    rho = _two_level_state(two_level.eig)
    args = (two_level.ops, two_level.eig, two_level.spectrum)
    with pytest.raises(PointwiseUndefined):
        jd_finite_time_oracle(*args, WhiteNoise(0.1), rho, 5.0, 0.004)
    with pytest.raises(StepTooCoarse):
        jd_finite_time_oracle(*args, two_level.kernel, rho, 5.0, 0.02)
    with pytest.raises(ValueError):
        jd_finite_time_oracle(*args, two_level.kernel, rho, 1.0, 0.004)  # below horizon
    with pytest.raises(ValueError):
        jd_finite_time_oracle(*args, two_level.kernel, rho, 0.0, 0.004)
    with pytest.raises(DimensionMismatch):
        jd_finite_time_oracle(*args, two_level.kernel, np.eye(3, dtype=complex) / 3.0, 5.0, 0.004)


def test_divergence_identity_is_machine_exact_here(ref4):
    assert divergence_identity_check(ref4.engine, ref4.generator, ref4.ops) <= 1e-12


def test_divergence_identity_flat_noise():
    bundle = make_bundle(2, [1.0, -1.0], hopping=5.0, kernel=WhiteNoise(0.3))
    assert divergence_identity_check(bundle.engine, bundle.generator, bundle.ops) <= 1e-11


def test_divergence_identity_zero_dissipator():
    bundle = make_bundle(3, np.zeros(3))
    assert divergence_identity_check(bundle.engine, bundle.generator, bundle.ops) == 0.0


def test_observable_divergence_cancels_sources(ref4):
    stack = jd_observables(ref4.engine)
    sources = lstar_density(ref4.generator, ref4.ops)
    div = discrete_divergence(list(stack))
    for r in range(4):
        assert np.linalg.norm(div[r] + sources[r]) <= 1e-12


def test_continuity_report_closes_the_balance(ref4):
    traj = evolve(ref4.generator, _site_projector(4), 1.0, 0.01)
    reports = continuity_report(ref4.generator, ref4.ops, ref4.engine, traj)
    assert len(reports) == len(traj.times)
    raw_scale = max(np.max(np.abs(r.residual_raw)) for r in reports)
    for rep in reports:
        np.testing.assert_allclose(
            rep.residual_raw, rep.site_lstar_density, atol=1e-9
        )
        assert np.max(np.abs(rep.residual_corrected)) <= 1e-8 * max(raw_scale, 1e-12)
        assert np.sum(rep.site_density) == pytest.approx(1.0, abs=1e-10)


def test_continuity_report_trivial_without_dissipation():
    bundle = make_bundle(3, np.zeros(3))
    traj = evolve(bundle.generator, _site_projector(3), 0.5, 0.01)
    reports = continuity_report(bundle.generator, bundle.ops, bundle.engine, traj)
    for rep in reports:
        np.testing.assert_allclose(rep.bond_j_diss, 0.0, atol=1e-15)
        np.testing.assert_allclose(rep.residual_raw, 0.0, atol=1e-12)
        np.testing.assert_allclose(rep.residual_corrected, 0.0, atol=1e-12)


def test_engine_dimension_guards(ref4):
    with pytest.raises(DimensionMismatch):
        jd_expectation(ref4.engine, np.eye(3, dtype=complex) / 3.0)
