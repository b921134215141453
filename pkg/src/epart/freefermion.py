"""Two-site matrices of thermal free spinful fermions on a ring.

Everything follows from two correlators of the Gaussian grand-canonical
state: the filling ``nbar = <n_{j sigma}>`` and the exchange correlation
``c = <c+_{jA sigma} c_{jB sigma}>``. No Fock space is built, so rings
of thousands of sites are cheap.

Two-site matrices use the local site states ``(0, up, dn, 2)`` with the
doubly occupied state ``c+_up c+_dn |0>`` and the combined index
``4 * a + b`` for site A in state ``a`` and site B in state ``b``.
Two-spin matrices use the order ``(up up, up dn, dn up, dn dn)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .entmeasures import WEIGHT_TOL, TwoQubitState, concurrence, eof_two_qubit
from .fock import DensityMatrix
from .thermal import chemical_potential_for_filling, fermi_occupations

#: Concurrence at or below this counts as zero when locating the entanglement length.
ZERO_CONCURRENCE = 1e-12

UP_LOCAL, DN_LOCAL, DOUBLE = 1, 2, 3


class CorrelationError(ValueError):
    pass


class InvalidSeparationError(CorrelationError):
    pass


@dataclass(frozen=True)
class CorrelationPair:
    """Filling per spin-orbital and exchange correlation between two sites."""

    nbar: float
    c: complex

    def __post_init__(self):
        if not -1e-12 <= self.nbar <= 1 + 1e-12:
            raise CorrelationError(f"filling {self.nbar} outside [0, 1]")
        if abs(self.c) > min(self.nbar, 1 - self.nbar) + 1e-12:
            raise CorrelationError(
                f"|c| = {abs(self.c):.6g} exceeds min(nbar, 1 - nbar); correlations are inconsistent")


def correlations(M: int, t: float, T: float, mu: float, d: int) -> CorrelationPair:
    """``nbar = sum_k n_k / M`` and ``c = sum_k exp(2 pi i (jA - jB) k / M) n_k / M``.

    Site A is 0 and site B is ``d``.
    """
    if not 1 <= d <= M - 1:
        raise InvalidSeparationError(f"separation must be in 1..{M - 1}, got {d}")
    n = fermi_occupations(M, t, T, mu)
    return _pair(n, d)


def _pair(n: np.ndarray, d: int) -> CorrelationPair:
    """Correlators at separation ``d`` from mode occupations ``n``."""
    M = len(n)
    k = np.arange(M)
    phase = np.exp(-2j * np.pi * ((d * k) % M) / M)
    c = complex(np.dot(phase, n) / M)
    if abs(c.imag) < 1e-15:
        c = complex(c.real, 0.0)
    return CorrelationPair(float(n.mean()), c)


# ---------------------------------------------------------------------------
# two-site matrices


@dataclass(frozen=True, eq=False)
class ProjectedTwoSite:
    """One-particle-per-site block; ``weight`` is the probability ``P_11``."""

    matrix: np.ndarray

    @property
    def weight(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def state(self) -> TwoQubitState:
        return TwoQubitState(self.matrix)


def projected_two_site(pair: CorrelationPair) -> ProjectedTwoSite:
    """Closed form of the projected two-site matrix (a Werner form)."""
    n, c2 = pair.nbar, abs(pair.c) ** 2
    same = (n * n - c2) * ((1 - n) ** 2 - c2)
    opposite = (n * (1 - n) + c2) ** 2
    m = np.diag([same, opposite, opposite, same]).astype(float)
    m[1, 2] = m[2, 1] = -c2
    lam = np.linalg.eigvalsh(m)
    if lam[0] < -1e-10:
        raise CorrelationError(f"projected matrix is not positive (eigenvalue {lam[0]:.3g})")
    return ProjectedTwoSite(m)


def _spin_block(n: float, c: complex) -> np.ndarray:
    """Two-mode state of one spin species on sites A and B.

    Index ``2 * occ_A + occ_B``. The coherence between A occupied and B
    occupied is ``<c+_B c_A> = conj(c)``.
    """
    c2 = abs(c) ** 2
    hop = n * (1 - n) + c2
    r = np.zeros((4, 4), dtype=complex)
    r[0, 0] = (1 - n) ** 2 - c2
    r[1, 1] = r[2, 2] = hop
    r[3, 3] = n * n - c2
    r[2, 1] = np.conj(c)
    r[1, 2] = c
    return r


def _local_decomposition():
    """Spin occupations and fermion sign of every two-site basis state."""
    up = {0: 0, UP_LOCAL: 1, DN_LOCAL: 0, DOUBLE: 1}
    dn = {0: 0, UP_LOCAL: 0, DN_LOCAL: 1, DOUBLE: 1}
    iu, idn, sign = [], [], []
    for a in range(4):
        for b in range(4):
            iu.append(2 * up[a] + up[b])
            idn.append(2 * dn[a] + dn[b])
            # reorder A_up B_up A_dn B_dn into A_up A_dn B_up B_dn
            sign.append(-1.0 if up[b] and dn[a] else 1.0)
    return np.array(iu), np.array(idn), np.array(sign)


_IU, _ID, _SIGN = _local_decomposition()


def full_two_site_matrix(pair: CorrelationPair) -> DensityMatrix:
    """All 16 x 16 elements by Wick factorization with independent spins."""
    block = _spin_block(pair.nbar, pair.c)
    m = np.outer(_SIGN, _SIGN) * block[np.ix_(_IU, _IU)] * block[np.ix_(_ID, _ID)]
    if np.allclose(m.imag, 0.0, atol=1e-15):
        m = m.real
    labels = tuple(f"{x},{y}" for x in ("0", "up", "dn", "2") for y in ("0", "up", "dn", "2"))
    return DensityMatrix(m, None, (4, 4), labels)


def spin_matrix_from_sites(full: np.ndarray) -> np.ndarray:
    """Fold a 16 x 16 two-site matrix onto two spins.

    Element ``(s s', t t')`` sums the site elements where A goes from
    ``s`` to ``t`` or, if ``s == t``, from doubly occupied to doubly
    occupied; likewise for B.
    """
    full = np.asarray(full)
    spins = (UP_LOCAL, DN_LOCAL)
    out = np.zeros((4, 4), dtype=full.dtype)
    for i, (s, s2) in enumerate((x, y) for x in spins for y in spins):
        for j, (t, t2) in enumerate((x, y) for x in spins for y in spins):
            a_paths = [(s, t)] + ([(DOUBLE, DOUBLE)] if s == t else [])
            b_paths = [(s2, t2)] + ([(DOUBLE, DOUBLE)] if s2 == t2 else [])
            out[i, j] = sum(full[4 * a + b, 4 * a2 + b2] for a, a2 in a_paths for b, b2 in b_paths)
    return out


def spin_correlation_matrix(pair: CorrelationPair) -> TwoQubitState:
    """``<c+_{A t} c+_{B t'} c_{B s'} c_{A s}>`` arranged as a two-spin matrix."""
    return TwoQubitState(spin_matrix_from_sites(full_two_site_matrix(pair).matrix))


@dataclass(frozen=True)
class SitePairEntanglement:
    """Entanglement of particles between two sites of the ring.

    Only the one-particle-per-site sector can carry entanglement (every
    other sector has a single local state on one side), so
    ``E_P = P11 * EF``.
    """

    weight: float
    concurrence: float
    eof: float

    @property
    def entanglement(self) -> float:
        return self.weight * self.eof


def site_pair_entanglement(pair: CorrelationPair, kind: str = "projected") -> SitePairEntanglement:
    m = _two_spin(pair, kind)
    weight = float(np.real(np.trace(m)))
    if weight <= WEIGHT_TOL:  # empty or full band: nothing to entangle
        return SitePairEntanglement(max(weight, 0.0), 0.0, 0.0)
    return SitePairEntanglement(float(np.real(np.trace(m))), concurrence(m), eof_two_qubit(m))


# ---------------------------------------------------------------------------
# entanglement length


@dataclass(frozen=True)
class ProfilePoint:
    separation: int
    concurrence: float
    eof: float
    weight: float


@dataclass(frozen=True)
class EntanglementLengthResult:
    r_e: float  # integer number of sites, or math.inf
    profile: tuple[ProfilePoint, ...]


def _two_spin(pair: CorrelationPair, kind: str) -> np.ndarray:
    if kind == "projected":
        return projected_two_site(pair).matrix
    if kind == "spin":
        return spin_correlation_matrix(pair).matrix
    raise ValueError(f"matrix kind must be 'projected' or 'spin', got {kind!r}")


def entanglement_length_from_occupations(n: np.ndarray, kind: str = "projected",
                                         tol: float = ZERO_CONCURRENCE,
                                         full_profile: bool = True) -> EntanglementLengthResult:
    M = len(n)
    r_e = math.inf
    profile = []
    for d in range(1, M // 2 + 1):
        e = site_pair_entanglement(_pair(n, d), kind)
        profile.append(ProfilePoint(d, e.concurrence, e.eof, e.weight))
        if e.concurrence <= tol and r_e == math.inf:
            r_e = d
            if not full_profile:
                break
    return EntanglementLengthResult(r_e, tuple(profile))


def entanglement_length(M: int, t: float, T: float, mu: float, kind: str = "projected",
                        tol: float = ZERO_CONCURRENCE, full_profile: bool = True
                        ) -> EntanglementLengthResult:
    """Smallest separation whose two-site matrix has zero concurrence.

    Separations ``1 .. M // 2`` are scanned; ``r_e`` is ``math.inf`` when
    none of them is separable.
    """
    return entanglement_length_from_occupations(fermi_occupations(M, t, T, mu), kind, tol,
                                                full_profile)


@dataclass(frozen=True)
class SweepRow:
    target: float
    nbar: float
    mu: float
    r_e_projected: float
    r_e_spin: float

    @property
    def inverse_filling(self) -> float:
        return 1.0 / self.nbar


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    slope: float
    intercept: float
    r_squared: float


def linear_fit(x, y) -> tuple[float, float, float]:
    """Least-squares line through ``(x, y)``: slope, intercept and R^2."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    if len(x) < 2:
        return math.nan, math.nan, math.nan
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = ((y - y.mean()) ** 2).sum()
    r2 = 1.0 - (resid ** 2).sum() / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), float(r2)


def entanglement_length_sweep(M: int, t: float, T: float, fillings, tail: float = 0.1,
                              tol: float = ZERO_CONCURRENCE, map_fn=map) -> SweepResult:
    """Entanglement lengths of the projected and spin matrices across fillings.

    Each filling is converted to a chemical potential (at ``T = 0`` the
    nearest plateau at or below it). The line ``r_e`` against ``1/nbar``
    is fitted on rows with ``nbar <= tail`` and finite projected ``r_e``.
    ``map_fn`` may be an executor's ``map``; row order is preserved.
    """
    fillings = [float(f) for f in fillings]
    if any(not 0 < f < 1 for f in fillings):
        raise CorrelationError("fillings must lie strictly between 0 and 1")

    def row(f):
        mu, achieved, _ = chemical_potential_for_filling(M, t, T, f)
        n = fermi_occupations(M, t, T, mu)
        rp = entanglement_length_from_occupations(n, "projected", tol, full_profile=False).r_e
        rs = entanglement_length_from_occupations(n, "spin", tol, full_profile=False).r_e
        return SweepRow(f, float(n.mean()), mu, rp, rs)

    rows = tuple(map_fn(row, fillings))
    fit = [r for r in rows if r.nbar <= tail and math.isfinite(r.r_e_projected)]
    slope, intercept, r2 = linear_fit([r.inverse_filling for r in fit], [r.r_e_projected for r in fit])
    return SweepResult(rows, slope, intercept, r2)
