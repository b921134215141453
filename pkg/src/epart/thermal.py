"""Ground, canonical and grand-canonical states; Fermi occupations of the ring.

Units: k_B = hbar = 1, temperatures are in the energy units of the
Hamiltonian. ``T = 0`` is always the exact limit (ground-state mixture or
step function), never a small-temperature surrogate. ``T = inf`` gives
the maximally mixed state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import brentq
from scipy.special import expit

from .fock import DENSE_LIMIT, DensityMatrix, Operator
from .models import single_particle_energies

#: Relative tolerance grouping eigenvalues into one degenerate multiplet.
DEGENERACY_RTOL = 1e-9


class ThermalError(ValueError):
    pass


@dataclass(frozen=True)
class ThermalSpec:
    ensemble: str = "ground"
    T: float = 0.0
    mu: float | None = None

    def __post_init__(self):
        if self.ensemble not in ("ground", "canonical", "grand-canonical"):
            raise ThermalError(f"unknown ensemble {self.ensemble!r}")
        if not self.T >= 0:
            raise ThermalError("temperature must be non-negative")
        if self.ensemble == "grand-canonical" and self.mu is None:
            raise ThermalError("grand-canonical ensemble needs mu")


@dataclass(frozen=True, eq=False)
class GroundState:
    energy: float
    vectors: np.ndarray  # orthonormal columns spanning the ground multiplet
    mixture: DensityMatrix

    @property
    def degeneracy(self) -> int:
        return self.vectors.shape[1]


def _matrix(H) -> np.ndarray | sp.spmatrix:
    return H.matrix if isinstance(H, Operator) else H


def _multiplet(energies: np.ndarray) -> int:
    e0 = energies[0]
    tol = DEGENERACY_RTOL * max(1.0, abs(e0))
    return int(np.count_nonzero(energies - e0 <= tol))


def ground_state(H, dense_limit: int = DENSE_LIMIT) -> GroundState:
    """Lowest eigenvalue, its eigenspace and the equal mixture over it."""
    basis = H.basis if isinstance(H, Operator) else None
    mat = _matrix(H)
    dim = mat.shape[0]
    if dim <= dense_limit:
        arr = mat.toarray() if sp.issparse(mat) else np.asarray(mat)
        w, v = np.linalg.eigh(arr)
    else:
        k = min(8, dim - 2)
        while True:
            w, v = spla.eigsh(mat, k=k, which="SA")
            order = np.argsort(w)
            w, v = w[order], v[:, order]
            if _multiplet(w) < k or k >= dim - 2:
                break
            k = min(2 * k, dim - 2)
    d = _multiplet(w)
    vecs = v[:, :d]
    return GroundState(float(w[0]), vecs, DensityMatrix.mixture(vecs, basis))


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigen-decomposition of a Hamiltonian, block-diagonal in conserved numbers.

    ``blocks`` holds ``(indices, energies, vectors, number)`` per block;
    ``number`` is the eigenvalue of the first conserved operator (the
    particle number used with the chemical potential).
    """

    dim: int
    blocks: tuple
    basis: object = None

    @classmethod
    def of(cls, H, conserved=()) -> "Spectrum":
        mat = _matrix(H)
        mat = mat.tocsr() if sp.issparse(mat) else sp.csr_matrix(mat)
        dim = mat.shape[0]
        diags = [np.real(_matrix(q).diagonal()) for q in conserved]
        if diags:
            keys = np.round(np.column_stack(diags), 9)
            uniq, label = np.unique(keys, axis=0, return_inverse=True)
            label = np.ravel(label)
        else:
            uniq, label = np.zeros((1, 1)), np.zeros(dim, dtype=int)
        blocks = []
        for b in range(len(uniq)):
            idx = np.flatnonzero(label == b)
            sub = mat[idx][:, idx].toarray()
            if np.abs(mat[idx].toarray()).sum() - np.abs(sub).sum() > 1e-10:
                raise ThermalError("Hamiltonian does not conserve the given quantities")
            w, v = np.linalg.eigh(sub)
            blocks.append((idx, w, v, float(uniq[b][0]) if diags else 0.0))
        return cls(dim, tuple(blocks), getattr(H, "basis", None))

    @property
    def energies(self) -> np.ndarray:
        return np.sort(np.concatenate([b[1] for b in self.blocks]))

    def _assemble(self, weights_per_block) -> DensityMatrix:
        dtype = np.result_type(*[b[2].dtype for b in self.blocks])
        rho = np.zeros((self.dim, self.dim), dtype=dtype)
        for (idx, _, v, _), w in zip(self.blocks, weights_per_block):
            if np.any(w):
                rho[np.ix_(idx, idx)] = (v * w) @ v.conj().T
        return DensityMatrix(rho, self.basis)

    def thermal(self, T: float, mu: float = 0.0) -> DensityMatrix:
        """``exp(-(H - mu N)/T) / Z``; exact limits at ``T = 0`` and ``T = inf``."""
        shifted = [w - mu * n for _, w, _, n in self.blocks]
        if T == math.inf:
            weights = [np.full(len(s), 1.0 / self.dim) for s in shifted]
            return self._assemble(weights)
        emin = min(s.min() for s in shifted)
        if T == 0:
            tol = DEGENERACY_RTOL * max(1.0, abs(emin))
            weights = [(s - emin <= tol).astype(float) for s in shifted]
        elif T > 0:
            weights = [np.exp(-(s - emin) / T) for s in shifted]
        else:
            raise ThermalError("temperature must be non-negative")
        z = sum(w.sum() for w in weights)
        return self._assemble([w / z for w in weights])


def canonical_state(H, T: float) -> DensityMatrix:
    """Canonical state ``exp(-H/T)/Z`` (ground mixture at ``T = 0``)."""
    if T == 0:
        return ground_state(H).mixture
    return Spectrum.of(H).thermal(T)


def grand_canonical_state(H, N, T: float, mu: float) -> DensityMatrix:
    """``exp(-(H - mu N)/T) / Z`` on a full Fock space; ``N`` is the number operator."""
    return Spectrum.of(H, conserved=(N,)).thermal(T, mu)


# ---------------------------------------------------------------------------
# momentum-space occupations of the free ring

#: Levels within this distance of mu count as sitting at the Fermi level at T = 0.
LEVEL_TOL = 1e-12


def fermi_occupations(M: int, t: float, T: float, mu: float) -> np.ndarray:
    """Occupation ``n_k = 1 / (exp((E_k - mu)/T) + 1)`` per spin of each ring mode.

    At ``T = 0`` levels below ``mu`` are full, above empty, and a level at
    ``mu`` is half filled.
    """
    E = single_particle_energies(M, t)
    if T == math.inf:
        return np.full(M, 0.5)
    if T == 0:
        n = (E < mu).astype(float)
        n[np.abs(E - mu) <= LEVEL_TOL * max(1.0, abs(mu))] = 0.5
        return n
    if T < 0:
        raise ThermalError("temperature must be non-negative")
    with np.errstate(over="ignore"):  # tiny T: the argument saturates to +-inf, expit handles it
        return expit(-(E - mu) / T)


class FillingResult(NamedTuple):
    mu: float
    filling: float
    exact: bool


def _levels(M: int, t: float):
    """Distinct single-particle levels and the cumulative count up to each."""
    E = np.sort(single_particle_energies(M, t))
    levels, counts = [], []
    for e in E:
        if levels and abs(e - levels[-1]) <= 1e-9 * max(1.0, abs(t)):
            counts[-1] += 1
        else:
            levels.append(e)
            counts.append(1)
    return np.array(levels), np.cumsum(counts)


def chemical_potential_for_filling(M: int, t: float, T: float, filling: float,
                                   tol: float = 1e-9) -> FillingResult:
    """Chemical potential giving mean occupation ``filling`` per spin-orbital.

    For ``T > 0`` the filling is solved by bracketing in
    ``[-2t - 10T, 2t + 10T]``. At ``T = 0`` only the gap plateaus are
    reachable: the result is the midpoint of the gap above the largest
    plateau not exceeding the target, with ``exact`` telling whether the
    target was hit.
    """
    if not 0 < filling < 1:
        raise ThermalError("filling must lie strictly between 0 and 1")
    if T > 0:
        def excess(mu):
            return fermi_occupations(M, t, T, mu).mean() - filling

        lo, hi = -2 * abs(t) - 10 * T, 2 * abs(t) + 10 * T
        if T == math.inf:
            return FillingResult(0.0, 0.5, bool(abs(filling - 0.5) < tol))
        mu = brentq(excess, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
        achieved = fermi_occupations(M, t, T, mu).mean()
        return FillingResult(float(mu), float(achieved), bool(abs(achieved - filling) < tol))
    levels, cum = _levels(M, t)
    target = filling * M
    plateaus = np.concatenate([[0], cum])
    below = int(np.flatnonzero(plateaus <= target + 1e-9)[-1])
    count = plateaus[below]
    # gap between level below-1 (last filled) and level below (first empty)
    spacing = levels[1] - levels[0] if len(levels) > 1 else 1.0
    lower = levels[below - 1] if below > 0 else levels[0] - spacing
    upper = levels[below] if below < len(levels) else levels[-1] + spacing
    mu = 0.5 * (lower + upper)
    return FillingResult(float(mu), float(count / M), bool(abs(count - target) < 1e-9))


def plateau_fillings(M: int, t: float = 1.0, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    """Fillings reachable at ``T = 0`` (gap plateaus) inside ``(lo, hi)``."""
    _, cum = _levels(M, t)
    f = cum / M
    return f[(f > lo) & (f < hi)]
