"""Occupation-number bases, second-quantized operators and local projections.

Modes are labelled ``0 .. M-1``. For spinful fermions the canonical mode
index is ``2 * site + spin`` with spin up (0) before spin down (1); every
Jordan-Wigner sign in the package derives from this single global order.

Basis states are occupation tuples ordered lexicographically with the
largest occupation of mode 0 first, e.g. ``(2, 0), (1, 1), (0, 2)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, sqrt
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

BOSON = "boson"
FERMION = "fermion"

#: Dense linear algebra is used up to this dimension, sparse above it.
DENSE_LIMIT = 4096

UP, DOWN = 0, 1
#: Local states of one spinful site, in the order used by two-site matrices.
SITE_STATES = ("0", "up", "dn", "2")


class FockError(ValueError):
    """Base class for basis and operator construction errors."""


class InvalidSectorError(FockError):
    pass


class SectorViolationError(FockError):
    """An operator term leaves the Hilbert space of the basis."""


class InvalidPairError(FockError):
    pass


# ---------------------------------------------------------------------------
# bases


@dataclass(frozen=True, eq=False)
class FockBasis:
    """Enumerated occupation-number basis.

    ``total`` fixes the particle number; ``max_occupation`` truncates boson
    modes when ``total`` is None (fermions always have cutoff 1).
    """

    kind: str
    modes: int
    total: int | None
    max_occupation: int
    states: tuple[tuple[int, ...], ...] = field(repr=False)
    index: dict = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.states)

    @property
    def occupations(self) -> np.ndarray:
        return _occupation_array(self)

    def state_index(self, occupations: Sequence[int]) -> int:
        return self.index[tuple(occupations)]

    def basis_vector(self, occupations: Sequence[int]) -> np.ndarray:
        v = np.zeros(self.dim)
        v[self.state_index(occupations)] = 1.0
        return v

    def __hash__(self):
        return hash((self.kind, self.modes, self.total, self.max_occupation))

    def __eq__(self, other):
        if not isinstance(other, FockBasis):
            return NotImplemented
        return (self.kind, self.modes, self.total, self.max_occupation) == (
            other.kind, other.modes, other.total, other.max_occupation)


@lru_cache(maxsize=None)
def _occupation_array(basis: FockBasis) -> np.ndarray:
    arr = np.array(basis.states, dtype=np.int64).reshape(basis.dim, basis.modes)
    arr.setflags(write=False)
    return arr


def _descending(modes: int, cap: int, total: int | None):
    """Occupation tuples in descending lexicographic order."""
    if total is None:
        yield from itertools.product(range(cap, -1, -1), repeat=modes)
        return
    if modes == 1:
        if total <= cap:
            yield (total,)
        return
    for first in range(min(cap, total), -1, -1):
        rest = total - first
        if rest > cap * (modes - 1):
            continue
        for tail in _descending(modes - 1, cap, rest):
            yield (first,) + tail


@lru_cache(maxsize=64)
def enumerate_basis(kind: str, modes: int, total: int | None = None,
                    max_occupation: int | None = None) -> FockBasis:
    """Enumerate the Fock basis for ``modes`` modes.

    Parameters
    ----------
    kind : {"boson", "fermion"}
    modes : int
        Number of single-particle modes ``M``.
    total : int, optional
        Fixed total particle number. ``None`` gives the full (possibly
        truncated) Fock space.
    max_occupation : int, optional
        Per-mode cutoff for bosons. Defaults to ``total``; required for a
        boson basis without fixed ``total``.
    """
    if kind not in (BOSON, FERMION):
        raise FockError(f"unknown particle kind {kind!r}")
    if modes < 1:
        raise InvalidSectorError("need at least one mode")
    if total is not None and total < 0:
        raise InvalidSectorError(f"negative particle number {total}")
    if kind == FERMION:
        if total is not None and total > modes:
            raise InvalidSectorError(f"{total} fermions do not fit in {modes} modes")
        cap = 1
    else:
        if max_occupation is None:
            if total is None:
                raise InvalidSectorError("boson basis without fixed N needs max_occupation")
            max_occupation = total
        cap = max_occupation
    states = tuple(_descending(modes, cap, total))
    if not states:
        raise InvalidSectorError(f"empty sector: N={total}, M={modes}, cap={cap}")
    index = {s: i for i, s in enumerate(states)}
    return FockBasis(kind, modes, total, cap, states, index)


def sector_dimension(kind: str, modes: int, total: int | None) -> int:
    """Closed-form dimension of an untruncated sector."""
    if kind == FERMION:
        return 2 ** modes if total is None else comb(modes, total)
    return comb(total + modes - 1, total)


# ---------------------------------------------------------------------------
# ladder strings


def cdag(mode: int) -> tuple[int, bool]:
    return (mode, True)


def c(mode: int) -> tuple[int, bool]:
    return (mode, False)


def number(mode: int) -> tuple[tuple[int, bool], ...]:
    return (cdag(mode), c(mode))


def adjoint_string(ops: Sequence[tuple[int, bool]]) -> tuple[tuple[int, bool], ...]:
    return tuple((m, not d) for m, d in reversed(ops))


def apply_string(occ: Sequence[int], ops: Sequence[tuple[int, bool]], kind: str,
                 cap: int | None = None):
    """Apply the operator product ``ops`` (rightmost acts first) to ``occ``.

    Returns ``(new_occupations, amplitude)`` or ``None`` when the state is
    annihilated. ``cap`` marks the boson truncation; exceeding it returns
    ``(new_occupations, amplitude)`` anyway so callers can detect leaks.
    """
    n = list(occ)
    amp = 1.0
    for mode, dagger in reversed(ops):
        if kind == FERMION:
            if n[mode] == (1 if dagger else 0):
                return None
            if sum(n[:mode]) % 2:
                amp = -amp
            n[mode] = 1 if dagger else 0
        else:
            if dagger:
                n[mode] += 1
                amp *= sqrt(n[mode])
            else:
                if n[mode] == 0:
                    return None
                amp *= sqrt(n[mode])
                n[mode] -= 1
    return tuple(n), amp


# ---------------------------------------------------------------------------
# operators


@dataclass(frozen=True, eq=False)
class Operator:
    """Sparse matrix acting on a :class:`FockBasis`."""

    basis: FockBasis
    matrix: sp.csr_matrix

    @property
    def dim(self) -> int:
        return self.basis.dim

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def adjoint(self) -> "Operator":
        return Operator(self.basis, self.matrix.conj().T.tocsr())

    def _other(self, other):
        if isinstance(other, Operator):
            if other.basis != self.basis:
                raise FockError("operators live on different bases")
            return other.matrix
        return other

    def __add__(self, other):
        return Operator(self.basis, (self.matrix + self._other(other)).tocsr())

    def __sub__(self, other):
        return Operator(self.basis, (self.matrix - self._other(other)).tocsr())

    def __mul__(self, scalar):
        return Operator(self.basis, (self.matrix * scalar).tocsr())

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, Operator):
            return Operator(self.basis, (self.matrix @ self._other(other)).tocsr())
        return self.matrix @ other


def identity(basis: FockBasis) -> Operator:
    return Operator(basis, sp.identity(basis.dim, format="csr"))


Term = tuple[complex, Sequence[tuple[int, bool]]]


def build_operator(basis: FockBasis, terms: Iterable[Term], strict: bool = True) -> Operator:
    """Matrix of ``sum(coef * ops)`` in ``basis``.

    Each term is ``(coefficient, ops)`` with ``ops`` a product of ladder
    operators written left to right, e.g. ``(-t, [cdag(0), c(1)])``.

    With ``strict`` a term that maps any basis state outside the basis
    raises :class:`SectorViolationError`; otherwise such amplitudes are
    dropped (plain truncation).
    """
    terms = [(coef, tuple(ops)) for coef, ops in terms]
    for coef, ops in terms:
        for mode, _ in ops:
            if not 0 <= mode < basis.modes:
                raise FockError(f"mode {mode} outside 0..{basis.modes - 1}")
        net = sum(1 if d else -1 for _, d in ops)
        if basis.total is not None and net != 0 and strict:
            raise SectorViolationError(
                f"term {ops} changes particle number by {net} on a fixed-N basis")
    rows, cols, vals = [], [], []
    index = basis.index
    for j, occ in enumerate(basis.states):
        for coef, ops in terms:
            if coef == 0:
                continue
            res = apply_string(occ, ops, basis.kind)
            if res is None:
                continue
            new, amp = res
            i = index.get(new)
            if i is None:
                if strict:
                    raise SectorViolationError(
                        f"term {ops} maps {occ} to {new}, outside the basis")
                continue
            rows.append(i)
            cols.append(j)
            vals.append(coef * amp)
    dtype = complex if any(np.iscomplexobj(np.asarray(v)) for v in vals) else float
    mat = sp.csr_matrix((np.array(vals, dtype=dtype), (rows, cols)),
                        shape=(basis.dim, basis.dim))
    mat.sum_duplicates()
    return Operator(basis, mat)


def number_operator(basis: FockBasis, modes: Iterable[int] | None = None) -> Operator:
    """Diagonal operator counting particles in ``modes`` (all by default)."""
    modes = range(basis.modes) if modes is None else list(modes)
    diag = basis.occupations[:, list(modes)].sum(axis=1).astype(float)
    return Operator(basis, sp.diags(diag, format="csr"))


# ---------------------------------------------------------------------------
# states


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Possibly sub-normalized density matrix.

    ``weight`` is the trace; ``normalized()`` divides it out. ``dims``
    records a bipartite block structure ``(dA, dB)`` when there is one.
    """

    matrix: np.ndarray
    basis: FockBasis | None = None
    dims: tuple[int, int] | None = None
    labels: tuple | None = None

    @property
    def weight(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def normalized(self) -> "DensityMatrix":
        w = self.weight
        if w <= 0:
            raise FockError("cannot normalize a zero-weight state")
        return DensityMatrix(self.matrix / w, self.basis, self.dims, self.labels)

    @classmethod
    def from_vector(cls, psi, basis: FockBasis | None = None, **kw) -> "DensityMatrix":
        psi = np.asarray(psi)
        return cls(np.outer(psi, psi.conj()), basis, **kw)

    @classmethod
    def mixture(cls, vectors: np.ndarray, basis: FockBasis | None = None,
                weights=None) -> "DensityMatrix":
        """Mixture of the column vectors of ``vectors`` (equal weights by default)."""
        vectors = np.atleast_2d(np.asarray(vectors).T).T
        k = vectors.shape[1]
        w = np.full(k, 1.0 / k) if weights is None else np.asarray(weights, dtype=float)
        return cls((vectors * w) @ vectors.conj().T, basis)


def as_density(rho, basis: FockBasis | None = None) -> DensityMatrix:
    """Accept a state vector, a matrix or a DensityMatrix."""
    if isinstance(rho, DensityMatrix):
        return rho
    arr = np.asarray(rho)
    if arr.ndim == 1:
        return DensityMatrix.from_vector(arr, basis)
    return DensityMatrix(arr, basis)


# ---------------------------------------------------------------------------
# bipartitions and local particle number


@dataclass(frozen=True)
class BipartitionSpec:
    """Disjoint mode sets controlled by parties A and B."""

    A: tuple[int, ...]
    B: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "A", tuple(int(m) for m in self.A))
        object.__setattr__(self, "B", tuple(int(m) for m in self.B))
        if not self.A or not self.B:
            raise FockError("both parties need at least one mode")
        if set(self.A) & set(self.B):
            raise FockError(f"parties overlap on modes {sorted(set(self.A) & set(self.B))}")
        if len(set(self.A)) != len(self.A) or len(set(self.B)) != len(self.B):
            raise FockError("repeated mode in partition")

    def validate(self, modes: int) -> None:
        bad = [m for m in self.A + self.B if not 0 <= m < modes]
        if bad:
            raise FockError(f"partition modes {bad} outside 0..{modes - 1}")

    def environment(self, modes: int) -> tuple[int, ...]:
        used = set(self.A) | set(self.B)
        return tuple(m for m in range(modes) if m not in used)


def _reorder_sign(occ: Sequence[int], order: Sequence[int]) -> int:
    """Sign of reordering occupied fermion modes into ``order``."""
    occupied = [m for m in order if occ[m]]
    inversions = 0
    for i in range(len(occupied)):
        for j in range(i + 1, len(occupied)):
            if occupied[i] > occupied[j]:
                inversions += 1
    return -1 if inversions % 2 else 1


@dataclass(frozen=True, eq=False)
class LocalSplit:
    """Map from basis states to (A config, B config, environment config)."""

    a_configs: tuple[tuple[int, ...], ...]
    b_configs: tuple[tuple[int, ...], ...]
    e_configs: tuple[tuple[int, ...], ...]
    ia: np.ndarray
    ib: np.ndarray
    ie: np.ndarray
    sign: np.ndarray


@lru_cache(maxsize=128)
def local_split(basis: FockBasis, partition: BipartitionSpec) -> LocalSplit:
    """Factor every basis state as A x B x environment.

    Fermionic states are re-expressed with A's creation operators first,
    then B's, then the environment's, which makes A and B operators act
    locally; the resulting sign is stored per state.
    """
    partition.validate(basis.modes)
    env = partition.environment(basis.modes)
    order = partition.A + partition.B + env
    occ = basis.occupations

    def configs(modes):
        sub = [tuple(int(x) for x in row) for row in occ[:, list(modes)]] if modes else [()] * basis.dim
        uniq = sorted(set(sub), key=lambda s: (sum(s), tuple(-x for x in s)))
        lookup = {s: i for i, s in enumerate(uniq)}
        return tuple(uniq), np.array([lookup[s] for s in sub], dtype=np.int64)

    a_cfg, ia = configs(partition.A)
    b_cfg, ib = configs(partition.B)
    e_cfg, ie = configs(env)
    if basis.kind == FERMION:
        sign = np.array([_reorder_sign(s, order) for s in basis.states], dtype=float)
    else:
        sign = np.ones(basis.dim)
    return LocalSplit(a_cfg, b_cfg, e_cfg, ia, ib, ie, sign)


def bipartite_state(rho, partition: BipartitionSpec, basis: FockBasis | None = None) -> DensityMatrix:
    """Reduced state of A and B over the product of their local configurations.

    Environment modes (those in neither party) are traced out. The result
    is indexed by ``ia * len(b_configs) + ib`` and carries
    ``labels = (a_configs, b_configs)``.
    """
    vector = None
    if not isinstance(rho, DensityMatrix) and np.ndim(rho) == 1:
        vector = np.asarray(rho)
    else:
        rho = as_density(rho, basis)
        basis = rho.basis if rho.basis is not None else basis
    if basis is None:
        raise FockError("state has no basis attached")
    split = local_split(basis, partition)
    na, nb, ne = len(split.a_configs), len(split.b_configs), len(split.e_configs)
    row = (split.ia * nb + split.ib) * ne + split.ie
    iso = sp.csr_matrix((split.sign, (row, np.arange(basis.dim))), shape=(na * nb * ne, basis.dim))
    if vector is not None:
        amp = (iso @ vector).reshape(na * nb, ne)
        reduced = amp @ amp.conj().T
    else:
        full = iso @ (iso @ rho.matrix.T).T  # iso rho iso^T without densifying iso
        full = np.asarray(full).reshape(na * nb, ne, na * nb, ne)
        reduced = np.einsum("aebe->ab", full)
    return DensityMatrix(reduced, None, (na, nb), (split.a_configs, split.b_configs))


@dataclass(frozen=True, eq=False)
class SectorState:
    """Unnormalized projection of a bipartite state onto fixed local numbers."""

    nA: int
    nB: int
    matrix: np.ndarray
    a_configs: tuple[tuple[int, ...], ...]
    b_configs: tuple[tuple[int, ...], ...]

    @property
    def weight(self) -> float:
        return float(np.real(np.trace(self.matrix))) if self.matrix.size else 0.0

    @property
    def dims(self) -> tuple[int, int]:
        return len(self.a_configs), len(self.b_configs)

    def density(self) -> DensityMatrix:
        return DensityMatrix(self.matrix, None, self.dims, (self.a_configs, self.b_configs))


def _sector_block(ab: DensityMatrix, nA: int, nB: int) -> SectorState:
    a_cfg, b_cfg = ab.labels
    ai = [i for i, s in enumerate(a_cfg) if sum(s) == nA]
    bi = [i for i, s in enumerate(b_cfg) if sum(s) == nB]
    nb = len(b_cfg)
    idx = [a * nb + b for a in ai for b in bi]
    block = ab.matrix[np.ix_(idx, idx)] if idx else np.zeros((0, 0))
    return SectorState(nA, nB, block, tuple(a_cfg[i] for i in ai), tuple(b_cfg[i] for i in bi))


def project_local_number(rho, partition: BipartitionSpec, nA: int, nB: int,
                         basis: FockBasis | None = None) -> SectorState:
    """Project onto ``nA`` particles in A and ``nB`` in B.

    The weight of the returned sector is ``Tr(Pi rho Pi)``; a sector with
    no states comes back empty with weight 0.
    """
    return _sector_block(bipartite_state(rho, partition, basis), nA, nB)


def local_number_sectors(rho, partition: BipartitionSpec,
                         basis: FockBasis | None = None) -> list[SectorState]:
    """All non-empty ``(nA, nB)`` sectors, ordered by ``(nA, nB)``."""
    ab = bipartite_state(rho, partition, basis)
    a_cfg, b_cfg = ab.labels
    na_vals = sorted({sum(s) for s in a_cfg})
    nb_vals = sorted({sum(s) for s in b_cfg})
    return [_sector_block(ab, x, y) for x in na_vals for y in nb_vals]


def sector_projector(basis: FockBasis, partition: BipartitionSpec, nA: int, nB: int) -> Operator:
    """Projector onto fixed local numbers, built from occupation counts."""
    occ = basis.occupations
    mask = (occ[:, list(partition.A)].sum(axis=1) == nA) & (occ[:, list(partition.B)].sum(axis=1) == nB)
    return Operator(basis, sp.diags(mask.astype(float), format="csr"))


# ---------------------------------------------------------------------------
# two-site reduction for spinful fermions


def site_mode(site: int, spin: int) -> int:
    return 2 * site + spin


def _site_string(site: int, local: int):
    """Creation string producing a local state from the empty site."""
    up, dn = cdag(site_mode(site, UP)), cdag(site_mode(site, DOWN))
    return [(), (up,), (dn,), (up, dn)][local]


@lru_cache(maxsize=32)
def _two_site_structure(basis: FockBasis, site_a: int, site_b: int):
    """Sparse structure of every operator |y><x| on two sites.

    The operator for x -> y is C_y P0 C_x^dagger, with C the creation
    strings of the two-site local states and P0 the projector onto empty
    sites; its action on each basis state is recorded as (column j,
    row i, amplitude).
    """
    modes = [site_mode(site_a, UP), site_mode(site_a, DOWN),
             site_mode(site_b, UP), site_mode(site_b, DOWN)]
    strings = [tuple(_site_string(site_a, a)) + tuple(_site_string(site_b, b))
               for a in range(4) for b in range(4)]
    occ = basis.occupations
    local = occ[:, modes]
    code = local[:, 0] + 2 * local[:, 1]
    code_b = local[:, 2] + 2 * local[:, 3]
    # local code 0:empty 1:up 2:dn 3:both, matches SITE_STATES order
    x_of_state = code * 4 + code_b
    struct = {}
    for x in range(16):
        cols = np.flatnonzero(x_of_state == x)
        ann = adjoint_string(strings[x])
        emptied = []
        for j in cols:
            res = apply_string(basis.states[j], ann, basis.kind)
            if res is None:
                continue
            new, amp = res
            if any(new[m] for m in modes):
                continue
            emptied.append((j, new, amp))
        for y in range(16):
            js, is_, amps = [], [], []
            for j, new, amp in emptied:
                res = apply_string(new, strings[y], basis.kind)
                if res is None:
                    continue
                occ2, amp2 = res
                i = basis.index.get(occ2)
                if i is None:
                    continue
                js.append(j)
                is_.append(i)
                amps.append(amp * amp2)
            struct[(x, y)] = (np.array(js, dtype=np.int64), np.array(is_, dtype=np.int64),
                              np.array(amps))
    return struct


def reduce_two_site(rho, site_a: int, site_b: int, basis: FockBasis | None = None) -> DensityMatrix:
    """16x16 two-site matrix of a spinful fermion state.

    Entry ``[x, y]`` is ``<|y><x|>``, i.e. the expectation value of the
    normal-ordered string mapping local configuration ``x`` to ``y``.
    Local states per site follow :data:`SITE_STATES`; the combined index is
    ``4 * state_A + state_B``. In this convention the one-per-site entry
    ``(s s', t t')`` equals ``<c+_{A t} c+_{B t'} Pi c_{B s'} c_{A s}>``
    with ``Pi`` projecting both sites onto zero particles.
    """
    if site_a == site_b:
        raise InvalidPairError("two-site reduction needs distinct sites")
    rho = as_density(rho, basis)
    basis = rho.basis if rho.basis is not None else basis
    if basis is None or basis.kind != FERMION or basis.modes % 2:
        raise FockError("two-site reduction needs a spinful fermion basis")
    n_sites = basis.modes // 2
    for s in (site_a, site_b):
        if not 0 <= s < n_sites:
            raise InvalidPairError(f"site {s} outside 0..{n_sites - 1}")
    struct = _two_site_structure(basis, site_a, site_b)
    mat = rho.matrix
    out = np.zeros((16, 16), dtype=np.result_type(mat.dtype, float))
    for (x, y), (js, is_, amps) in struct.items():
        if js.size:
            out[x, y] = np.sum(amps * mat[js, is_])
    labels = tuple(f"{a},{b}" for a in SITE_STATES for b in SITE_STATES)
    return DensityMatrix(out, None, (4, 4), labels)


# ---------------------------------------------------------------------------
# single-particle mode rotations


def _permanent(m: np.ndarray) -> complex:
    n = m.shape[0]
    if n == 0:
        return 1.0
    total = 0.0
    for perm in itertools.permutations(range(n)):
        total += np.prod(m[np.arange(n), perm])
    return total


def mode_rotation(basis: FockBasis, w: np.ndarray) -> np.ndarray:
    """Many-body matrix for new modes ``C_a = sum_j w[a, j] c_j``.

    Returns ``T`` with ``psi_new = T @ psi`` expressing a state given in
    the old modes as amplitudes on occupation states of the new modes
    (same basis enumeration). Fermions use Slater determinants, bosons
    normalized permanents. ``w`` must be unitary.
    """
    w = np.asarray(w, dtype=complex)
    if basis.total is None:
        raise FockError("mode rotation needs a fixed-N basis")
    lists = [[m for m, n in enumerate(s) for _ in range(n)] for s in basis.states]
    norms = [np.prod([float(np.prod(range(1, n + 1))) for n in s]) for s in basis.states]
    out = np.zeros((basis.dim, basis.dim), dtype=complex)
    for i, new in enumerate(lists):
        for j, old in enumerate(lists):
            sub = w[np.ix_(new, old)]
            if basis.kind == FERMION:
                out[i, j] = np.linalg.det(sub) if new else 1.0
            else:
                out[i, j] = _permanent(sub) / sqrt(norms[i] * norms[j])
    return out
