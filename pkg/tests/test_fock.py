from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from epart.fock import (BOSON, FERMION, BipartitionSpec, DensityMatrix, FockError,
                        InvalidPairError, InvalidSectorError, SectorViolationError,
                        apply_string, bipartite_state, build_operator, c, cdag, enumerate_basis,
                        identity, local_number_sectors, mode_rotation, number_operator,
                        project_local_number, reduce_two_site, sector_dimension,
                        sector_projector)


def random_state(rng, dim, complex_=True):
    v = rng.normal(size=dim) + (1j * rng.normal(size=dim) if complex_ else 0)
    return v / np.linalg.norm(v)


def random_density(rng, dim, rank=3):
    vs = np.column_stack([random_state(rng, dim) for _ in range(rank)])
    w = rng.random(rank)
    return (vs * (w / w.sum())) @ vs.conj().T


@pytest.mark.parametrize("modes,total", [(4, 2), (6, 3), (5, 0), (3, 3)])
def test_fermion_dimension(modes, total):
    assert enumerate_basis(FERMION, modes, total).dim == comb(modes, total)


@pytest.mark.parametrize("modes,total", [(4, 2), (3, 4), (6, 4), (1, 3)])
def test_boson_dimension(modes, total):
    b = enumerate_basis(BOSON, modes, total)
    assert b.dim == comb(total + modes - 1, total) == sector_dimension(BOSON, modes, total)


def test_full_fermion_fock_space():
    assert enumerate_basis(FERMION, 4).dim == 16


def test_basis_order_is_descending():
    b = enumerate_basis(BOSON, 2, 2)
    assert b.states == ((2, 0), (1, 1), (0, 2))
    assert b.state_index((1, 1)) == 1


def test_invalid_sectors():
    with pytest.raises(InvalidSectorError):
        enumerate_basis(FERMION, 3, 4)
    with pytest.raises(InvalidSectorError):
        enumerate_basis(BOSON, 3)
    with pytest.raises(InvalidSectorError):
        enumerate_basis(BOSON, 3, -1)


def test_fermion_strings_anticommute():
    vac = (0, 0, 0)
    s01 = apply_string(vac, [cdag(0), cdag(1)], FERMION)
    s10 = apply_string(vac, [cdag(1), cdag(0)], FERMION)
    assert s01[0] == s10[0] == (1, 1, 0)
    assert s01[1] == -s10[1]
    assert apply_string((1, 0, 0), [cdag(0)], FERMION) is None


def test_hop_sign_with_mode_zero_first():
    # c+_1 c_0 |1,0> = c+_1 |0,0> = |0,1>, no string crosses an occupied mode
    assert apply_string((1, 0), [cdag(1), c(0)], FERMION) == ((0, 1), 1.0)
    # c+_2 c_0 |1,1,0>: c_0 gives +, c+_2 passes the occupied mode 1 and gives -
    assert apply_string((1, 1, 0), [cdag(2), c(0)], FERMION) == ((0, 1, 1), -1.0)


def test_canonical_anticommutation_relations():
    basis = enumerate_basis(FERMION, 3)
    eye = identity(basis).toarray()
    for i in range(3):
        for j in range(3):
            ci = build_operator(basis, [(1.0, [c(i)])]).toarray()
            cj_dag = build_operator(basis, [(1.0, [cdag(j)])]).toarray()
            assert np.allclose(ci @ cj_dag + cj_dag @ ci, eye * (i == j))
            cj = build_operator(basis, [(1.0, [c(j)])]).toarray()
            assert np.allclose(ci @ cj + cj @ ci, 0)


def test_boson_ladder_factors():
    basis = enumerate_basis(BOSON, 2, 3)
    hop = build_operator(basis, [(1.0, [cdag(0), c(1)])])
    i, j = basis.state_index((3, 0)), basis.state_index((2, 1))
    assert hop.toarray()[i, j] == pytest.approx(np.sqrt(3) * 1.0)
    n0 = build_operator(basis, [(1.0, [cdag(0), c(0)])])
    assert np.allclose(n0.toarray(), number_operator(basis, [0]).toarray())


def test_non_conserving_term_on_fixed_n_raises():
    basis = enumerate_basis(FERMION, 4, 2)
    with pytest.raises(SectorViolationError):
        build_operator(basis, [(1.0, [cdag(0)])])


def test_bipartition_validation():
    with pytest.raises(FockError):
        BipartitionSpec((0, 1), (1, 2))
    with pytest.raises(FockError):
        BipartitionSpec((), (1,))
    with pytest.raises(FockError):
        BipartitionSpec((0,), (5,)).validate(4)
    assert BipartitionSpec((0,), (2,)).environment(4) == (1, 3)


def test_product_state_bipartite_reduction():
    basis = enumerate_basis(FERMION, 4, 2)
    psi = basis.basis_vector((1, 0, 1, 0))
    ab = bipartite_state(psi, BipartitionSpec((0, 1), (2, 3)), basis)
    assert ab.dims == (4, 4)
    assert np.isclose(np.trace(ab.matrix), 1.0)
    assert np.isclose(np.linalg.eigvalsh(ab.matrix).max(), 1.0)


def test_fermion_reordering_sign_matters_for_interleaved_partition():
    # c+_0 c+_1 |0> split into A = {1}, B = {0}: A's operator must come first
    basis = enumerate_basis(FERMION, 2, 1)
    psi = (basis.basis_vector((1, 0)) + basis.basis_vector((0, 1))) / np.sqrt(2)
    ab = bipartite_state(psi, BipartitionSpec((1,), (0,)), basis)
    assert np.isclose(np.trace(ab.matrix), 1.0)
    basis2 = enumerate_basis(FERMION, 2, 2)
    ab2 = bipartite_state(basis2.basis_vector((1, 1)), BipartitionSpec((1,), (0,)), basis2)
    assert np.isclose(ab2.matrix.real.max(), 1.0)


@given(seed=st.integers(0, 2**32 - 1), kind=st.sampled_from([BOSON, FERMION]))
def test_sector_projectors_are_complete(seed, kind):
    rng = np.random.default_rng(seed)
    modes = int(rng.integers(3, 6))
    total = int(rng.integers(1, modes))
    basis = enumerate_basis(kind, modes, total)
    perm = rng.permutation(modes)
    cut = int(rng.integers(1, modes))
    part = BipartitionSpec(tuple(perm[:cut]), tuple(perm[cut:]))
    eye = np.zeros((basis.dim, basis.dim))
    for nA in range(total + 1):
        eye += sector_projector(basis, part, nA, total - nA).toarray()
    assert np.allclose(eye, np.eye(basis.dim))
    rho = DensityMatrix(random_density(rng, basis.dim), basis)
    weights = [s.weight for s in local_number_sectors(rho, part)]
    assert sum(weights) == pytest.approx(1.0, abs=1e-10)


@given(seed=st.integers(0, 2**32 - 1))
def test_bipartite_reduction_is_hermitian_psd_and_trace_preserving(seed):
    rng = np.random.default_rng(seed)
    basis = enumerate_basis(FERMION, 6, 3)
    part = BipartitionSpec((0, 3), (1, 5))  # modes 2 and 4 are traced out
    rho = DensityMatrix(random_density(rng, basis.dim), basis)
    ab = bipartite_state(rho, part)
    assert np.allclose(ab.matrix, ab.matrix.conj().T, atol=1e-12)
    assert np.linalg.eigvalsh(ab.matrix).min() > -1e-10
    assert np.trace(ab.matrix).real == pytest.approx(1.0, abs=1e-10)


def test_vector_and_matrix_paths_agree():
    rng = np.random.default_rng(3)
    basis = enumerate_basis(BOSON, 4, 3)
    psi = random_state(rng, basis.dim)
    part = BipartitionSpec((0, 2), (1,))
    a = bipartite_state(psi, part, basis).matrix
    b = bipartite_state(DensityMatrix.from_vector(psi, basis), part).matrix
    assert np.allclose(a, b, atol=1e-12)


def test_project_local_number_weight():
    basis = enumerate_basis(BOSON, 2, 2)
    psi = np.ones(3) / np.sqrt(3)
    sec = project_local_number(psi, BipartitionSpec((0,), (1,)), 1, 1, basis)
    assert sec.weight == pytest.approx(1 / 3)
    assert project_local_number(psi, BipartitionSpec((0,), (1,)), 2, 2, basis).weight == 0.0


def test_reduce_two_site_of_two_site_system_is_a_relabelling():
    rng = np.random.default_rng(1)
    basis = enumerate_basis(FERMION, 4)
    rho = DensityMatrix(random_density(rng, 16), basis)
    red = reduce_two_site(rho, 0, 1)
    assert np.trace(red.matrix).real == pytest.approx(1.0)
    assert np.allclose(np.sort(np.linalg.eigvalsh(red.matrix)), np.sort(np.linalg.eigvalsh(rho.matrix)))


def test_reduce_two_site_errors():
    basis = enumerate_basis(FERMION, 4)
    rho = DensityMatrix(np.eye(16) / 16, basis)
    with pytest.raises(InvalidPairError):
        reduce_two_site(rho, 0, 0)
    with pytest.raises(InvalidPairError):
        reduce_two_site(rho, 0, 2)


def _correlator(rho, basis, ops):
    return np.trace(rho @ build_operator(basis, [(1.0, ops)]).toarray())


def test_one_per_site_entries_match_projected_correlators():
    rng = np.random.default_rng(7)
    basis = enumerate_basis(FERMION, 6, 3)
    rho = random_density(rng, basis.dim)
    red = reduce_two_site(DensityMatrix(rho, basis), 0, 2).matrix
    # (up up, up up): <n_Au (1 - n_Ad) n_Bu (1 - n_Bd)>
    expect = (_correlator(rho, basis, [cdag(0), c(0), cdag(4), c(4)])
              - _correlator(rho, basis, [cdag(0), c(0), cdag(1), c(1), cdag(4), c(4)])
              - _correlator(rho, basis, [cdag(0), c(0), cdag(4), c(4), cdag(5), c(5)])
              + _correlator(rho, basis, [cdag(0), c(0), cdag(1), c(1), cdag(4), c(4), cdag(5), c(5)]))
    assert red[5, 5] == pytest.approx(expect, abs=1e-12)
    # (up dn, dn up): <c+_Au c_Ad c+_Bd c_Bu>, both sites singly occupied on both sides
    assert red[6, 9] == pytest.approx(_correlator(rho, basis, [cdag(1), c(0), cdag(4), c(5)]), abs=1e-12)


def test_folded_two_site_matrix_is_the_raw_spin_correlator():
    from epart.freefermion import spin_matrix_from_sites

    rng = np.random.default_rng(7)
    basis = enumerate_basis(FERMION, 6, 3)
    rho = random_density(rng, basis.dim)
    spin = spin_matrix_from_sites(reduce_two_site(DensityMatrix(rho, basis), 0, 2).matrix)
    labels = [(a, b) for a in (0, 1) for b in (0, 1)]
    for i, (s, s2) in enumerate(labels):
        for j, (t, t2) in enumerate(labels):
            expect = _correlator(rho, basis, [cdag(t), cdag(4 + t2), c(4 + s2), c(s)])
            assert spin[i, j] == pytest.approx(expect, abs=1e-12)


@pytest.mark.parametrize("kind", [FERMION, BOSON])
def test_mode_rotation_is_unitary_and_composes(kind):
    rng = np.random.default_rng(11)
    basis = enumerate_basis(kind, 3, 2)
    q1, _ = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    q2, _ = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    t1, t2 = mode_rotation(basis, q1), mode_rotation(basis, q2)
    assert np.allclose(t1.conj().T @ t1, np.eye(basis.dim))
    assert np.allclose(mode_rotation(basis, q2 @ q1), t2 @ t1)
    assert np.allclose(mode_rotation(basis, np.eye(3)), np.eye(basis.dim))


def test_mode_rotation_needs_fixed_n():
    with pytest.raises(FockError):
        mode_rotation(enumerate_basis(FERMION, 2), np.eye(2))
