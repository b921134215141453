"""Lattice Hamiltonians and closed-form reference states."""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial, sqrt

import numpy as np

from .fock import (BOSON, DOWN, FERMION, UP, FockBasis, Operator, build_operator, c,
                   cdag, enumerate_basis, mode_rotation, site_mode)

FAMILIES = ("bose-hubbard-ring", "spinless-fermion-ring", "hubbard-dimer",
            "spinful-fermion-lattice")


class ModelError(ValueError):
    pass


class DegenerateLimitError(ModelError):
    pass


@dataclass(frozen=True)
class ModelSpec:
    family: str
    M: int
    t: float = 1.0
    U: float = 0.0
    N: int | None = None
    periodic: bool = True

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ModelError(f"unknown model family {self.family!r}")
        if self.M < 2:
            raise ModelError("need at least two sites")
        if self.family == "hubbard-dimer" and self.M != 2:
            raise ModelError("the Hubbard dimer has exactly two sites")

    def hamiltonian(self) -> Operator:
        if self.family == "bose-hubbard-ring":
            return bose_hubbard_ring(self.M, self.t, self.U, self._n())
        if self.family == "spinless-fermion-ring":
            return spinless_fermion_ring(self.M, self.t, self._n(), periodic=self.periodic)
        if self.family == "hubbard-dimer":
            return hubbard_dimer(self.t, self.U, N=2 if self.N is None else self.N)
        return spinful_fermion_lattice(self.M, self.t, self.periodic, N=self.N, U=self.U)

    def _n(self) -> int:
        if self.N is None:
            raise ModelError(f"{self.family} needs a particle number N")
        return self.N


def bonds(M: int, periodic: bool = True) -> list[tuple[int, int]]:
    """Nearest-neighbour bonds of a chain; each unordered pair appears once."""
    out = [(j, j + 1) for j in range(M - 1)]
    if periodic and M > 2:
        out.append((M - 1, 0))
    return out


def _hopping_terms(t, pairs):
    terms = []
    for i, j in pairs:
        terms.append((-t, [cdag(i), c(j)]))
        terms.append((-t, [cdag(j), c(i)]))
    return terms


def bose_hubbard_ring(M: int, t: float, U: float, N: int) -> Operator:
    """``-t sum (b+_j b_j+1 + h.c.) + U sum n_j (n_j - 1)`` on a periodic ring."""
    if M < 2 or N < 0:
        raise ModelError("need M >= 2 and N >= 0")
    basis = enumerate_basis(BOSON, M, N)
    terms = _hopping_terms(t, bonds(M))
    terms += [(U, [cdag(j), cdag(j), c(j), c(j)]) for j in range(M)]
    return build_operator(basis, terms)


def spinless_fermion_ring(M: int, t: float, N: int, periodic: bool = True) -> Operator:
    """Free spinless fermions on a ring of ``M`` sites with ``N`` particles."""
    if not 0 <= N <= M:
        raise ModelError(f"need 0 <= N <= M, got N={N}")
    basis = enumerate_basis(FERMION, M, N)
    return build_operator(basis, _hopping_terms(t, bonds(M, periodic)))


def spinful_fermion_lattice(M: int, t: float, periodic: bool = True, N: int | None = None,
                            U: float = 0.0) -> Operator:
    """Spin-conserving nearest-neighbour hopping of spin-1/2 fermions.

    Modes are ``2 * site + spin``. ``N=None`` gives the full Fock space
    (needed for grand-canonical states). ``U`` adds on-site repulsion; the
    free lattice has ``U = 0``.
    """
    if M < 2:
        raise ModelError("need at least two sites")
    basis = enumerate_basis(FERMION, 2 * M, N)
    terms = []
    for spin in (UP, DOWN):
        pairs = [(site_mode(i, spin), site_mode(j, spin)) for i, j in bonds(M, periodic)]
        terms += _hopping_terms(t, pairs)
    if U:
        terms += [(U, [cdag(site_mode(j, UP)), c(site_mode(j, UP)),
                       cdag(site_mode(j, DOWN)), c(site_mode(j, DOWN))]) for j in range(M)]
    return build_operator(basis, terms)


def hubbard_dimer(t: float, U: float, N: int = 2) -> Operator:
    """Two-site Hubbard model; modes ``L_up, L_dn, R_up, R_dn``."""
    if t <= 0 or U < 0:
        raise ModelError("need t > 0 and U >= 0")
    return spinful_fermion_lattice(2, t, periodic=False, N=N, U=U)


def single_particle_energies(M: int, t: float) -> np.ndarray:
    """``E_k = -2 t cos(2 pi k / M)`` for ``k = 0 .. M-1``.

    ``E_k == E_{M-k}`` exactly and the quarter-band levels are exactly
    zero, so particle-hole symmetry survives round-off.
    """
    k = np.arange(M)
    folded = np.minimum(k, M - k)
    E = -2.0 * t * np.cos(2.0 * np.pi * folded / M)
    E[4 * folded == M] = 0.0
    return E


# ---------------------------------------------------------------------------
# reference states


def alpha(x: float) -> float:
    return x + sqrt(1.0 + x * x)


def dimer_ground_analytic(t: float, U: float) -> np.ndarray:
    """Closed-form Hubbard-dimer ground state in the N=2 basis.

    The pair creation operator is
    ``c+_Lu c+_Ld + c+_Ru c+_Rd + alpha(U/4t) (c+_Lu c+_Rd - c+_Ld c+_Ru)``
    applied to the vacuum, then normalized.
    """
    if t == 0:
        raise DegenerateLimitError("t = 0 is degenerate; diagonalize the Hamiltonian instead")
    a = alpha(U / (4.0 * t))
    Lu, Ld, Ru, Rd = (site_mode(0, UP), site_mode(0, DOWN), site_mode(1, UP), site_mode(1, DOWN))
    vac = enumerate_basis(FERMION, 4, 0)
    pair = [(1.0, [cdag(Lu), cdag(Ld)]), (1.0, [cdag(Ru), cdag(Rd)]),
            (a, [cdag(Lu), cdag(Rd)]), (-a, [cdag(Ld), cdag(Ru)])]
    return _create_from_vacuum(enumerate_basis(FERMION, 4, 2), vac, pair)


def _create_from_vacuum(target: FockBasis, vacuum: FockBasis, terms) -> np.ndarray:
    from .fock import apply_string

    psi = np.zeros(target.dim, dtype=complex)
    empty = vacuum.states[0]
    for coef, ops in terms:
        res = apply_string(empty, ops, target.kind)
        if res is None:
            continue
        occ, amp = res
        psi[target.index[occ]] += coef * amp
    psi /= np.linalg.norm(psi)
    return psi.real if np.allclose(psi.imag, 0.0) else psi


def dimer_momentum_modes() -> np.ndarray:
    """Unitary ``w`` with ``C_{k s} = (c_{L s} + e^{i k pi} c_{R s}) / sqrt 2``.

    New modes are ordered ``(k, spin)`` with index ``2 k + spin``.
    """
    w = np.zeros((4, 4), dtype=complex)
    for k in (0, 1):
        for s in (UP, DOWN):
            for j in (0, 1):
                w[2 * k + s, site_mode(j, s)] = np.exp(1j * k * np.pi * j) / sqrt(2.0)
    return w


def ring_momentum_modes(M: int) -> np.ndarray:
    """``C_k = M^-1/2 sum_j e^{2 pi i j k / M} c_j`` as a unitary matrix."""
    j = np.arange(M)
    return np.exp(2j * np.pi * np.outer(j, j) / M) / sqrt(M)


def to_new_modes(psi, basis: FockBasis, w: np.ndarray) -> np.ndarray:
    """Amplitudes of ``psi`` on occupation states of the modes ``w``."""
    return mode_rotation(basis, w) @ np.asarray(psi)


def from_new_modes(phi, basis: FockBasis, w: np.ndarray) -> np.ndarray:
    return mode_rotation(basis, w).conj().T @ np.asarray(phi)


def spinless_ring_ground_basis(t: float = 1.0) -> np.ndarray:
    """The two degenerate ground states ``C+_1 C+_0|vac>`` and ``C+_3 C+_0|vac>``.

    Four-site ring, two particles; columns of the returned array are the
    states in the site basis. Valid for ``t > 0``.
    """
    if t <= 0:
        raise ModelError("the k = 0, 1, 3 ground manifold needs t > 0")
    basis = enumerate_basis(FERMION, 4, 2)
    w = ring_momentum_modes(4)
    cols = []
    for occ in ((1, 1, 0, 0), (1, 0, 0, 1)):
        phi = basis.basis_vector(occ).astype(complex)
        cols.append(from_new_modes(phi, basis, w))
    return np.column_stack(cols)


def free_boson_ground(M: int, N: int) -> np.ndarray:
    """``(sum_j b+_j)^N |vac> / sqrt(M^N N!)`` for ``M`` modes and ``N`` bosons."""
    if M < 1 or N < 0:
        raise ModelError("need M >= 1 and N >= 0")
    basis = enumerate_basis(BOSON, M, N)
    # multinomial expansion: coefficient of prod (b+_j)^n_j is N!/prod n_j!
    psi = np.empty(basis.dim)
    for i, occ in enumerate(basis.states):
        denom = 1.0
        for n in occ:
            denom *= factorial(n)
        psi[i] = factorial(N) / denom * sqrt(denom)
    return psi / sqrt(M ** N * factorial(N))


def staggered_gauge(basis: FockBasis) -> np.ndarray:
    """Diagonal of the gauge ``b_j -> (-1)^j b_j``, which flips the sign of ``t``.

    The gauge is a product of single-site phases, so every entanglement
    measure is unchanged by it.
    """
    occ = basis.occupations
    return (-1.0) ** (occ @ np.arange(occ.shape[1]))


def hardcore_boson_limit_state() -> np.ndarray:
    """Large-U ground state of two bosons on the four-site ring.

    The adjacent-pair amplitudes carry a minus sign, which makes this the
    ground state of the ``+t`` hopping ring. For the ``-t`` convention of
    :func:`bose_hubbard_ring` apply :func:`staggered_gauge` first.
    """
    basis = enumerate_basis(BOSON, 4, 2)
    psi = np.zeros(basis.dim)
    r = 1.0 / sqrt(2.0)
    for occ, amp in (((1, 0, 1, 0), 1.0), ((0, 1, 0, 1), 1.0), ((1, 1, 0, 0), -r),
                     ((0, 1, 1, 0), -r), ((0, 0, 1, 1), -r), ((1, 0, 0, 1), -r)):
        psi[basis.index[occ]] = amp / 2.0
    return psi

