import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st

from epart.fock import (FERMION, DensityMatrix, Operator, build_operator, c, cdag,
                        enumerate_basis, number_operator)
from epart.freefermion import correlations
from epart.models import bose_hubbard_ring, spinful_fermion_lattice, spinless_fermion_ring
from epart.thermal import (Spectrum, ThermalError, ThermalSpec, canonical_state,
                           chemical_potential_for_filling, fermi_occupations,
                           grand_canonical_state, ground_state, plateau_fillings)


def test_thermal_spec_validation():
    with pytest.raises(ThermalError):
        ThermalSpec("grand-canonical", 1.0)
    with pytest.raises(ThermalError):
        ThermalSpec("canonical", -1.0)
    with pytest.raises(ThermalError):
        ThermalSpec("microcanonical")
    assert ThermalSpec("grand-canonical", 0.5, mu=0.1).mu == 0.1


def test_ground_state_degeneracies():
    ring = ground_state(spinless_fermion_ring(4, 1.0, 2))
    assert ring.degeneracy == 2
    assert np.linalg.matrix_rank(ring.mixture.matrix, tol=1e-10) == 2
    bose = ground_state(bose_hubbard_ring(4, 1.0, 1.0, 2))
    assert bose.degeneracy == 1
    assert np.trace(bose.mixture.matrix @ bose.mixture.matrix).real == pytest.approx(1.0)


@pytest.mark.parametrize("H", [bose_hubbard_ring(4, 1.0, 0.3, 3), spinless_fermion_ring(6, 1.0, 3),
                               spinful_fermion_lattice(3, 1.0, N=3, U=2.0)])
def test_ground_eigenspace(H):
    g = ground_state(H)
    v = g.vectors
    assert np.allclose(v.conj().T @ v, np.eye(g.degeneracy), atol=1e-10)
    assert np.abs(H.toarray() @ v - g.energy * v).max() < 1e-10


def test_sparse_ground_state_path_matches_dense():
    H = spinless_fermion_ring(6, 1.0, 3)
    dense = ground_state(H)
    sparse = ground_state(H, dense_limit=4)
    assert sparse.energy == pytest.approx(dense.energy, abs=1e-10)
    assert sparse.degeneracy == dense.degeneracy
    assert np.allclose(sparse.mixture.matrix, dense.mixture.matrix, atol=1e-8)


def test_two_level_populations():
    H = sp.csr_matrix(np.diag([0.0, 0.7]))
    rho = canonical_state(H, 0.3).matrix
    assert rho[1, 1] / rho[0, 0] == pytest.approx(math.exp(-0.7 / 0.3))


def test_infinite_temperature_limit():
    H = bose_hubbard_ring(4, 1.0, 1.0, 2)
    rho = canonical_state(H, 1e6).matrix
    assert np.abs(rho - np.eye(10) / 10).max() < 1e-6
    assert np.allclose(Spectrum.of(H).thermal(math.inf).matrix, np.eye(10) / 10)


def test_huge_energies_do_not_overflow():
    H = sp.csr_matrix(np.diag([1e5, 1e5 + 1.0]))
    rho = canonical_state(H, 0.01).matrix
    assert np.isfinite(rho).all() and rho[0, 0] == pytest.approx(1.0)


def test_low_temperature_approaches_ground_mixture():
    H = spinless_fermion_ring(4, 1.0, 2)
    rho = canonical_state(H, 0.02).matrix
    ground = ground_state(H).mixture.matrix
    assert np.abs(np.linalg.eigvalsh(rho - ground)).sum() < 1e-10


@pytest.mark.parametrize("T", [0.0, 0.4, 3.0])
def test_thermal_states_commute_with_h(T):
    H = spinful_fermion_lattice(3, 1.0, U=1.0)
    N = number_operator(H.basis)
    for rho in (canonical_state(bose_hubbard_ring(4, 1.0, 0.5, 2), T),
                grand_canonical_state(H, N, T, -0.2)):
        m = rho.matrix
        h = (bose_hubbard_ring(4, 1.0, 0.5, 2) if m.shape[0] == 10 else H).toarray()
        assert np.abs(m @ h - h @ m).max() < 1e-10
        assert np.trace(m).real == pytest.approx(1.0)


def test_single_mode_fermi_occupation():
    basis = enumerate_basis(FERMION, 1)
    E, mu, T = 0.4, -0.1, 0.25
    H = Operator(basis, sp.csr_matrix(np.diag([E, 0.0])))  # states (1,), (0,)
    rho = grand_canonical_state(H, number_operator(basis), T, mu).matrix
    assert rho[0, 0].real == pytest.approx(1 / (math.exp((E - mu) / T) + 1))


def test_very_negative_mu_gives_vacuum():
    H = spinful_fermion_lattice(2, 1.0, periodic=False)
    rho = grand_canonical_state(H, number_operator(H.basis), 0.3, -100.0).matrix
    vac = H.basis.state_index((0, 0, 0, 0))
    assert rho[vac, vac].real == pytest.approx(1.0)


def test_spectrum_rejects_non_conserved_quantity():
    basis = enumerate_basis(FERMION, 2)
    H = build_operator(basis, [(1.0, [cdag(0)]), (1.0, [c(0)])])
    with pytest.raises(ThermalError):
        Spectrum.of(H, conserved=(number_operator(basis),))


@pytest.mark.parametrize("M", [4, 5])
@pytest.mark.parametrize("T,mu", [(0.5, -0.4), (0.0, -0.9), (1.5, 0.7)])
def test_ed_correlators_match_momentum_sums(M, T, mu):
    H = spinful_fermion_lattice(M, 1.0)
    rho = grand_canonical_state(H, number_operator(H.basis), T, mu).matrix
    for d in range(1, M):
        op = build_operator(H.basis, [(1.0, [cdag(0), c(2 * d)])]).toarray()
        ed = np.trace(rho @ op)
        assert ed == pytest.approx(correlations(M, 1.0, T, mu, d).c, abs=1e-10)


def test_correlators_are_translation_invariant():
    M = 5
    H = spinful_fermion_lattice(M, 1.0)
    rho = grand_canonical_state(H, number_operator(H.basis), 0.6, 0.3).matrix
    def g(i, j):
        return np.trace(rho @ build_operator(H.basis, [(1.0, [cdag(2 * i + 1), c(2 * j + 1)])]).toarray())
    for d in range(1, M):
        vals = [g(i, (i + d) % M) for i in range(M)]
        assert np.allclose(vals, vals[0], atol=1e-12)


@given(T=st.floats(0.0, 50.0), half=st.integers(2, 30))
def test_half_filling_at_zero_mu(T, half):
    # even rings are particle-hole symmetric about zero energy
    M = 2 * half
    assert fermi_occupations(M, 1.0, T, 0.0).mean() == pytest.approx(0.5, abs=1e-12)


def test_zero_temperature_step():
    assert np.all(fermi_occupations(10, 1.0, 0.0, 2.5) == 1.0)
    n = fermi_occupations(4, 1.0, 0.0, 0.0)  # levels -2, 0, 2, 0
    assert list(n) == [1.0, 0.5, 0.0, 0.5]


def test_infinite_temperature_occupations():
    assert np.all(fermi_occupations(7, 1.0, math.inf, -1.3) == 0.5)


@given(T=st.floats(0.05, 5.0), mu=st.floats(-3.0, 3.0), dmu=st.floats(1e-3, 1.0))
def test_filling_increases_with_mu(T, mu, dmu):
    assert fermi_occupations(30, 1.0, T, mu + dmu).sum() > fermi_occupations(30, 1.0, T, mu).sum()


def test_half_filling_chemical_potential():
    assert chemical_potential_for_filling(30, 1.0, 0.0, 0.5).mu == pytest.approx(0.0, abs=1e-12)
    assert chemical_potential_for_filling(30, 1.0, 0.7, 0.5).mu == pytest.approx(0.0, abs=1e-9)


def test_unreachable_zero_temperature_filling_is_flagged():
    res = chemical_potential_for_filling(30, 1.0, 0.0, 0.2)
    lo, hi = -2 * math.cos(2 * math.pi * 2 / 30), -2 * math.cos(2 * math.pi * 3 / 30)
    assert lo < res.mu < hi
    assert not res.exact
    assert res.filling == pytest.approx(5 / 30)
    # the count of occupied k below that mu is the plateau, not 6
    assert int((fermi_occupations(30, 1.0, 0.0, res.mu) == 1).sum()) == 5


def test_zero_temperature_plateaus_are_odd_counts():
    counts = np.rint(plateau_fillings(30) * 30).astype(int)
    assert list(counts) == list(range(1, 30, 2))


def test_two_electron_filling():
    res = chemical_potential_for_filling(30, 1.0, 0.0, 1 / 30)
    assert res.exact
    n = fermi_occupations(30, 1.0, 0.0, res.mu)
    assert 2 * n.sum() == 2


@given(f=st.floats(0.01, 0.99), T=st.floats(0.01, 3.0))
def test_finite_temperature_filling_is_reached(f, T):
    res = chemical_potential_for_filling(30, 1.0, T, f)
    assert res.exact
    assert fermi_occupations(30, 1.0, T, res.mu).mean() == pytest.approx(f, abs=1e-9)


def test_filling_domain():
    with pytest.raises(ThermalError):
        chemical_potential_for_filling(30, 1.0, 0.1, 1.0)


def test_density_matrix_normalization():
    rho = DensityMatrix(np.diag([0.2, 0.2]))
    assert rho.normalized().weight == pytest.approx(1.0)
