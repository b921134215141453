"""Entanglement measures and the entanglement-of-particles pipeline.

Entanglement of particles is the weighted sum, over fixed local particle
numbers ``(nA, nB)``, of the entanglement of modes of each projected and
renormalized sector. Per sector the measure is the entanglement of
formation: von Neumann entropy for pure sectors, the Wootters closed form
for two-qubit sectors, and zero when either party has a single local
state. Anything else raises rather than returning an approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import BipartitionSpec, DensityMatrix, FockBasis, SectorState, as_density, \
    bipartite_state, local_number_sectors

#: Eigenvalues in [-CLIP, 0) are treated as numerical zeros.
CLIP = 1e-10
#: Eigenvalues of a normalized two-qubit state below this are round-off.
RANK_TOL = 1e-14
#: Sectors lighter than this carry no weight in the sum.
WEIGHT_TOL = 1e-14
#: A normalized state whose top eigenvalue is within this of 1 counts as pure.
PURITY_TOL = 1e-10

_Y = np.array([[0, -1j], [1j, 0]])
_YY = np.kron(_Y, _Y)
SINGLET = np.array([0, 1, -1, 0]) / math.sqrt(2.0)
PI_A = np.outer(SINGLET, SINGLET)
PI_S = np.eye(4) - PI_A


class EntanglementError(ValueError):
    pass


class DomainError(EntanglementError):
    pass


class UnsupportedReductionError(EntanglementError):
    pass


class UnsupportedMeasureError(EntanglementError):
    pass


class UnsupportedSectorError(EntanglementError):
    def __init__(self, sectors):
        self.sectors = list(sectors)
        super().__init__(f"sectors {self.sectors} are mixed and not two-qubit; "
                         "entanglement of formation is not available")


class WernerFormError(EntanglementError):
    pass


# ---------------------------------------------------------------------------
# scalar measures


def binary_entropy(x: float) -> float:
    """``h(x) = -x log2 x - (1-x) log2(1-x)`` with ``h(0) = h(1) = 0``."""
    if x < -1e-12 or x > 1 + 1e-12:
        raise DomainError(f"binary entropy needs 0 <= x <= 1, got {x}")
    x = min(max(float(x), 0.0), 1.0)
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def _eigvals(matrix) -> np.ndarray:
    lam = np.linalg.eigvalsh(np.asarray(matrix))
    if lam.min(initial=0.0) < -CLIP * max(1.0, np.abs(lam).max(initial=0.0)):
        raise EntanglementError(f"state is not positive semidefinite (eigenvalue {lam.min():.3g})")
    return np.clip(lam, 0.0, None)


def entropy_of_spectrum(lam) -> float:
    lam = np.asarray(lam, dtype=float)
    lam = lam[lam > 0]
    return max(0.0, float(-(lam * np.log2(lam)).sum()))


def von_neumann_entropy(rho) -> float:
    """Entropy in bits; ``0 log 0 = 0``."""
    mat = rho.matrix if isinstance(rho, (DensityMatrix, TwoQubitState)) else np.asarray(rho)
    return entropy_of_spectrum(_eigvals(mat))


def partial_trace(matrix: np.ndarray, dims: tuple[int, int], keep: str = "A") -> np.ndarray:
    dA, dB = dims
    t = np.asarray(matrix).reshape(dA, dB, dA, dB)
    return np.einsum("ajbj->ab", t) if keep == "A" else np.einsum("iaib->ab", t)


def partial_transpose(matrix: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    """Transpose on party B."""
    dA, dB = dims
    t = np.asarray(matrix).reshape(dA, dB, dA, dB)
    return t.transpose(0, 3, 2, 1).reshape(dA * dB, dA * dB)


def negativity(rho, dims: tuple[int, int] | None = None) -> float:
    """Sum of the magnitudes of the negative eigenvalues of the partial transpose.

    The state is normalized first.
    """
    if isinstance(rho, DensityMatrix):
        dims = dims or rho.dims
        mat = rho.matrix
    elif isinstance(rho, TwoQubitState):
        dims, mat = (2, 2), rho.matrix
    else:
        mat = np.asarray(rho)
    if dims is None:
        raise EntanglementError("negativity needs the bipartite dimensions")
    mat = mat / np.real(np.trace(mat))
    lam = np.linalg.eigvalsh(partial_transpose(mat, dims))
    return float(-lam[lam < 0].sum()) + 0.0


# ---------------------------------------------------------------------------
# two qubits


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    """Two-qubit state over the ordered basis 00, 01, 10, 11.

    ``matrix`` is kept as given (possibly sub-normalized); ``weight`` is
    its trace.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.shape != (4, 4):
            raise EntanglementError(f"two-qubit state must be 4x4, got {m.shape}")
        if not np.allclose(m, m.conj().T, atol=1e-12):
            raise EntanglementError("two-qubit state is not Hermitian")
        _eigvals(m)
        object.__setattr__(self, "matrix", m)

    @property
    def weight(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def normalized(self) -> "TwoQubitState":
        w = self.weight
        if w <= 0:
            raise EntanglementError("cannot normalize a zero-weight state")
        return TwoQubitState(self.matrix / w)


def _as_two_qubit(rho) -> np.ndarray:
    if isinstance(rho, TwoQubitState):
        return rho.normalized().matrix
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    return TwoQubitState(mat).normalized().matrix


def concurrence(rho) -> float:
    """Wootters concurrence ``max(0, l1 - l2 - l3 - l4)``.

    The ``l_i`` are the decreasing square roots of the eigenvalues of
    ``rho (Y x Y) rho* (Y x Y)``. They equal the singular values of
    ``Psi^T (Y x Y) Psi`` for any ``rho = Psi Psi^+``, which avoids the
    square-root amplification of round-off near zero. Eigenvalues below
    ``RANK_TOL`` are round-off and dropped: concurrence reacts to a weight
    ``e`` like ``sqrt(e)``, so keeping them shifts C by ~1e-8.
    """
    m = _as_two_qubit(rho)
    w, v = np.linalg.eigh(m)
    w = np.where(w > RANK_TOL, w, 0.0)
    psi = v * np.sqrt(w)
    lam = np.linalg.svd(psi.T @ _YY @ psi, compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def eof_from_concurrence(C: float) -> float:
    C = min(max(C, 0.0), 1.0)
    return binary_entropy(0.5 * (1.0 + math.sqrt(max(0.0, 1.0 - C * C))))


def eof_two_qubit(rho) -> float:
    """Entanglement of formation ``h((1 + sqrt(1 - C^2))/2)`` in ebits."""
    return eof_from_concurrence(concurrence(rho))


def qubit_reduce(sector: SectorState, partition: BipartitionSpec) -> TwoQubitState:
    """Relabel a one-particle-per-party sector on two modes each as two qubits.

    Local occupations ``(1, 0)`` and ``(0, 1)`` become logical 0 and 1;
    the weight is kept.
    """
    if len(partition.A) != 2 or len(partition.B) != 2:
        raise UnsupportedReductionError("each party must control exactly two modes")
    if (sector.nA, sector.nB) != (1, 1):
        raise UnsupportedReductionError(f"sector ({sector.nA}, {sector.nB}) is not (1, 1)")
    logical = ((1, 0), (0, 1))
    if sector.a_configs != logical or sector.b_configs != logical:
        raise UnsupportedReductionError("local configurations are not single occupations")
    return TwoQubitState(sector.matrix)


# ---------------------------------------------------------------------------
# Werner states


@dataclass(frozen=True)
class WernerDecomposition:
    """``rho = pA Pi_A + (pS / 3) Pi_S`` with singlet fidelity ``f = pA``."""

    f: float
    pA: float
    pS: float

    @property
    def p(self) -> float:
        """Singlet weight in the ``p |s><s| + (1-p) 1/4`` parametrization."""
        return (4.0 * self.f - 1.0) / 3.0

    @property
    def entangled(self) -> bool:
        return self.f > 0.5


def singlet_fidelity(rho) -> float:
    m = _as_two_qubit(rho)
    return float(np.real(SINGLET @ m @ SINGLET))


def twirl(rho) -> TwoQubitState:
    """Average over ``U x U``: projects onto the Werner family with the same ``f``."""
    f = singlet_fidelity(rho)
    return TwoQubitState(f * PI_A + (1.0 - f) / 3.0 * PI_S)


def werner_decompose(rho, tol: float = 1e-8) -> WernerDecomposition:
    m = _as_two_qubit(rho)
    dist = np.abs(m - twirl(m).matrix).max()
    if dist > tol:
        raise WernerFormError(f"state is not of Werner form (distance {dist:.3g} from its twirl)")
    f = singlet_fidelity(m)
    return WernerDecomposition(f, f, 1.0 - f)


# ---------------------------------------------------------------------------
# entanglement of modes and of particles

MEASURES = ("eof", "entropy", "negativity")


def _is_pure(mat: np.ndarray) -> bool:
    """Purity test on a normalized state via ``Tr rho^2``."""
    return float(np.vdot(mat, mat).real) >= 1.0 - PURITY_TOL


def _entropy_of_pure(mat: np.ndarray, dims: tuple[int, int]) -> float:
    """Entropy of the smaller reduced state of a pure bipartite state."""
    keep = "A" if dims[0] <= dims[1] else "B"
    return entropy_of_spectrum(_eigvals(partial_trace(mat, dims, keep)))


def _mode_measure(mat: np.ndarray, dims: tuple[int, int], measure: str) -> float:
    """Entanglement of a normalized bipartite state of the given block dims."""
    if measure not in MEASURES:
        raise UnsupportedMeasureError(f"unknown measure {measure!r}")
    if measure == "negativity":
        return negativity(mat, dims)
    if min(dims) == 1:
        return 0.0
    if _is_pure(mat):
        return _entropy_of_pure(mat, dims)
    if measure == "eof" and dims == (2, 2):
        return eof_two_qubit(mat)
    raise UnsupportedMeasureError(
        f"{measure} is not defined here for a mixed state with local dimensions {dims}")


def entanglement_of_modes(rho, partition: BipartitionSpec, measure: str = "eof",
                          basis: FockBasis | None = None) -> float:
    """Entanglement between the modes of A and of B, environment traced out."""
    ab = bipartite_state(rho, partition, basis)
    mat = ab.matrix / ab.weight
    return _mode_measure(mat, ab.dims, measure)


@dataclass(frozen=True)
class SectorEntanglement:
    nA: int
    nB: int
    weight: float
    entanglement: float


@dataclass(frozen=True)
class EPReport:
    total: float
    sectors: tuple[SectorEntanglement, ...]

    @staticmethod
    def sum_sectors(sectors) -> float:
        total = 0.0
        for s in sectors:
            total += s.weight * s.entanglement
        return total


def entanglement_of_particles(rho, partition: BipartitionSpec, basis: FockBasis | None = None,
                              measure: str = "eof") -> EPReport:
    """Weighted sum of per-sector entanglement of modes.

    ``measure`` is ``"eof"`` (default) or ``"negativity"``.
    """
    if measure not in ("eof", "negativity"):
        raise UnsupportedMeasureError(f"entanglement of particles supports eof or negativity, not {measure!r}")
    if np.ndim(rho) != 1 or isinstance(rho, DensityMatrix):
        rho = as_density(rho, basis)
        basis = rho.basis if rho.basis is not None else basis
        norm = rho.weight
    else:
        norm = float(np.vdot(rho, rho).real)
    if norm <= 0:
        raise EntanglementError("state has zero weight")
    out, bad = [], []
    for sec in local_number_sectors(rho, partition, basis):
        weight = sec.weight / norm
        if weight <= WEIGHT_TOL:
            continue
        try:
            e = _mode_measure(sec.matrix / sec.weight, sec.dims, measure)
        except UnsupportedMeasureError:
            bad.append((sec.nA, sec.nB))
            continue
        out.append(SectorEntanglement(sec.nA, sec.nB, weight, e))
    if bad:
        raise UnsupportedSectorError(bad)
    out = tuple(out)
    return EPReport(EPReport.sum_sectors(out), out)
