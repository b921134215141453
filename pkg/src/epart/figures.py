"""Figure sweeps and the generic ``compute`` driver.

Each command takes a :class:`~epart.config.RunConfig` and a ``map``-like
callable (builtin ``map`` or an executor's ``map``) and returns a
:class:`~epart.table.ResultTable` plus the columns to plot. Rows follow
the grid order whatever the evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import (COMMON_KEYS, ENSEMBLE_KEYS, FLOATS, INTS, MODEL_KEYS, PARTITION_KEYS,
                     ConfigError, Param, RunConfig, _choice, _float, _int)
from .entmeasures import EPReport, entanglement_of_modes, entanglement_of_particles
from .fock import BipartitionSpec, DensityMatrix, mode_rotation, number_operator
from .freefermion import (_pair, entanglement_length_from_occupations, entanglement_length_sweep,
                          site_pair_entanglement)
from .models import (bose_hubbard_ring, dimer_momentum_modes, hubbard_dimer,
                     spinful_fermion_lattice, spinless_fermion_ring)
from .table import ResultTable
from .thermal import (Spectrum, canonical_state, chemical_potential_for_filling,
                      fermi_occupations, grand_canonical_state, ground_state, plateau_fillings)

BOSE_ADJACENT = BipartitionSpec((0, 1), (2, 3))
BOSE_DIAGONAL = BipartitionSpec((0, 2), (1, 3))
DIMER_SITE = BipartitionSpec((0, 1), (2, 3))
DIMER_SPIN = BipartitionSpec((0, 2), (1, 3))
# in the momentum frame modes are 2k + spin, so k = 0 holds modes 0 and 1
DIMER_MOMENTUM = BipartitionSpec((0, 1), (2, 3))


@dataclass(frozen=True)
class PlotSpec:
    x: str
    ys: tuple[str, ...]
    group: str | None = None
    logx: bool = False


def one_one(report: EPReport) -> tuple[float, float]:
    """Weight and entanglement of the one-particle-per-party sector."""
    for s in report.sectors:
        if (s.nA, s.nB) == (1, 1):
            return s.weight, s.entanglement
    return 0.0, math.nan


def grid(cfg: RunConfig, name: str) -> list[float]:
    """Grid ``name``, replaced by the sweep when ``sweep.axis`` names it."""
    if cfg.sweep is not None and cfg.sweep.axis == name:
        return [float(v) for v in cfg.sweep.values()]
    return list(cfg.values[f"grid.{name}"])


def _check_axis(cfg: RunConfig, names) -> None:
    if cfg.sweep is not None and cfg.sweep.axis not in names:
        raise ConfigError(f"sweep.axis must be one of {', '.join(names)}, got '{cfg.sweep.axis}'")


def _temperature(t_over_kT: float, t: float) -> float:
    """``k_B T`` from an inverse temperature; ``0`` means infinite T, ``inf`` means T = 0."""
    if t_over_kT == 0:
        return math.inf
    return 0.0 if math.isinf(t_over_kT) else t / t_over_kT


# ---------------------------------------------------------------------------
# bosons on four sites

BOSE_GROUND_KEYS = {**COMMON_KEYS,
                    "grid.U_over_t": Param(FLOATS, [0.0] + list(np.geomspace(1e-2, 1e3, 31)))}


def fig_bose_ground(cfg: RunConfig, map_fn=map):
    _check_axis(cfg, ("U_over_t",))

    def row(u):
        rho = ground_state(bose_hubbard_ring(4, 1.0, u, 2)).mixture
        adj = entanglement_of_particles(rho, BOSE_ADJACENT)
        diag = entanglement_of_particles(rho, BOSE_DIAGONAL)
        p11, ef = one_one(adj)
        return (u, adj.total, diag.total, p11, ef)

    table = ResultTable(("U_over_t", "E_P_adjacent", "E_P_diagonal", "P11", "EF"),
                        list(map_fn(row, grid(cfg, "U_over_t"))))
    return table, PlotSpec("U_over_t", ("E_P_adjacent", "P11", "EF"), logx=True)


BOSE_THERMAL_KEYS = {**COMMON_KEYS,
                     "grid.t_over_U": Param(FLOATS, [0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0]),
                     "grid.kT_over_U": Param(FLOATS, [0.0] + list(np.geomspace(1e-3, 10.0, 25)))}


def fig_bose_thermal(cfg: RunConfig, map_fn=map):
    _check_axis(cfg, ("t_over_U", "kT_over_U"))
    temps = grid(cfg, "kT_over_U")

    def rows_for(t):
        spec = Spectrum.of(bose_hubbard_ring(4, t, 1.0, 2))
        out = []
        for kT in temps:
            rep = entanglement_of_particles(spec.thermal(kT), BOSE_ADJACENT)
            p11, ef = one_one(rep)
            out.append((t, kT, rep.total, p11, ef))
        return out

    rows = [r for block in map_fn(rows_for, grid(cfg, "t_over_U")) for r in block]
    table = ResultTable(("t_over_U", "kT_over_U", "E_P", "P11", "EF_posterior"), rows)
    return table, PlotSpec("kT_over_U", ("E_P", "P11", "EF_posterior"), group="t_over_U", logx=True)


# ---------------------------------------------------------------------------
# Hubbard dimer

DIMER_KEYS = {**COMMON_KEYS,
              "grid.U_over_t": Param(FLOATS, list(np.linspace(0.0, 20.0, 41))),
              "grid.kT_over_t": Param(FLOATS, [0.0, 0.1, 0.2, 0.5, 1.0])}


def dimer_row_block(u: float, temps) -> list[tuple]:
    H = hubbard_dimer(1.0, u)
    spec = Spectrum.of(H)
    rot = mode_rotation(H.basis, dimer_momentum_modes())
    out = []
    for kT in temps:
        rho = spec.thermal(kT) if kT > 0 else ground_state(H).mixture
        site = entanglement_of_particles(rho, DIMER_SITE)
        p11, ef = one_one(site)
        rho_k = DensityMatrix(rot @ rho.matrix @ rot.conj().T, H.basis)
        mom = entanglement_of_particles(rho_k, DIMER_MOMENTUM)
        spin = entanglement_of_particles(rho, DIMER_SPIN)
        out.append((u, kT, p11, ef, site.total, mom.total, spin.total))
    return out


def fig_dimer(cfg: RunConfig, map_fn=map):
    _check_axis(cfg, ("U_over_t", "kT_over_t"))
    temps = grid(cfg, "kT_over_t")
    rows = [r for block in map_fn(lambda u: dimer_row_block(u, temps), grid(cfg, "U_over_t"))
            for r in block]
    table = ResultTable(("U_over_t", "kT_over_t", "P11", "EF_posterior", "E_P",
                         "E_P_momentum", "E_P_spin"), rows)
    return table, PlotSpec("U_over_t", ("E_P", "P11", "EF_posterior"), group="kT_over_t")


# ---------------------------------------------------------------------------
# free fermions on a ring

LATTICE_KEYS = {
    "lattice.M": Param(_int, 30),
    "lattice.t": Param(_float, 1.0),
    "lattice.T": Param(_float, 0.0),
}

LATTICE_COOL_KEYS = {**COMMON_KEYS, **LATTICE_KEYS,
                     "lattice.mu": Param(_float),
                     "lattice.filling": Param(_float, 0.2),
                     "grid.t_over_kT": Param(FLOATS, list(np.arange(0.0, 6.01, 0.25)) + [math.inf]),
                     "grid.separations": Param(INTS, list(range(1, 11)))}


def _lattice_mu(cfg: RunConfig, M: int, t: float) -> tuple[float, float, bool]:
    """Chemical potential: ``lattice.mu`` if given, else from the T = 0 target filling.

    Returns ``mu``, the zero-temperature filling it gives and whether the
    target was reached exactly.
    """
    mu = cfg.values["lattice.mu"]
    if mu is None:
        res = chemical_potential_for_filling(M, t, 0.0, cfg.values["lattice.filling"])
        return res.mu, res.filling, res.exact
    return mu, float(fermi_occupations(M, t, 0.0, mu).mean()), True


def _separations(cfg: RunConfig, M: int) -> list[int]:
    seps = [int(d) for d in grid(cfg, "separations")]
    bad = [d for d in seps if not 1 <= d <= M - 1]
    if bad:
        raise ConfigError(f"separations {bad} outside 1..{M - 1}")
    return seps


def fig_lattice_cool(cfg: RunConfig, map_fn=map):
    _check_axis(cfg, ("t_over_kT", "separations"))
    M, t = cfg.values["lattice.M"], cfg.values["lattice.t"]
    mu, ground_filling, exact = _lattice_mu(cfg, M, t)
    seps = _separations(cfg, M)

    def rows_for(beta):
        n = fermi_occupations(M, t, _temperature(beta, t), mu)
        out = []
        for d in seps:
            e = site_pair_entanglement(_pair(n, d))
            out.append((beta, d, e.entanglement, e.weight, e.eof))
        return out

    rows = [r for block in map_fn(rows_for, grid(cfg, "t_over_kT")) for r in block]
    table = ResultTable(("t_over_kT", "separation", "E_P", "P11", "EF_posterior"), rows)
    table.note("mu", mu)
    table.note("ground_state_filling", ground_filling)
    if cfg.values["lattice.mu"] is None:
        table.note("target_filling", cfg.values["lattice.filling"])
        table.note("target_reached", exact)
    return table, PlotSpec("t_over_kT", ("E_P", "P11", "EF_posterior"), group="separation")


FILLING_KEYS = {**COMMON_KEYS, **LATTICE_KEYS,
                "grid.filling": Param(FLOATS),
                "grid.separations": Param(INTS)}


def _filling_point(M: int, t: float, T: float, f: float):
    res = chemical_potential_for_filling(M, t, T, f)
    return res, fermi_occupations(M, t, T, res.mu)


def fig_filling(cfg: RunConfig, map_fn=map):
    _check_axis(cfg, ("filling", "separations"))
    M, t, T = cfg.values["lattice.M"], cfg.values["lattice.t"], cfg.values["lattice.T"]
    fills = grid(cfg, "filling") if (cfg.values["grid.filling"] or cfg.sweep) else \
        list(plateau_fillings(M, t))
    if cfg.values["grid.separations"] is None and not (cfg.sweep and cfg.sweep.axis == "separations"):
        seps = list(range(1, M // 2 + 1))
    else:
        seps = _separations(cfg, M)

    def rows_for(f):
        res, n = _filling_point(M, t, T, f)
        _, n_mirror = _filling_point(M, t, T, 1.0 - f)
        r_e = entanglement_length_from_occupations(n, full_profile=False).r_e
        r_e_m = entanglement_length_from_occupations(n_mirror, full_profile=False).r_e
        out = []
        for d in seps:
            e = site_pair_entanglement(_pair(n, d))
            em = site_pair_entanglement(_pair(n_mirror, d))
            out.append((f, res.filling, d, e.weight, e.eof, e.entanglement, em.eof, r_e, r_e_m))
        return out

    rows = [r for block in map_fn(rows_for, fills) for r in block]
    table = ResultTable(("target", "filling", "separation", "P11", "EF_posterior", "E_P",
                         "EF_mirror", "r_e", "r_e_mirror"), rows)
    return table, PlotSpec("filling", ("EF_posterior", "P11"), group="separation")


ENTLENGTH_KEYS = {**COMMON_KEYS, **LATTICE_KEYS,
                  "lattice.M": Param(_int, 2000),
                  "grid.filling": Param(FLOATS),
                  "fit.max_filling": Param(_float, 0.1)}


def default_entlength_fillings(M: int, t: float = 1.0, lo: float = 0.02, stride: int = 8) -> list[float]:
    """Every ``stride``-th plateau filling in ``[lo, 1/2]`` and its particle-hole mirror."""
    low = plateau_fillings(M, t, lo - 1e-12, 0.5 + 1e-12)[::stride]
    high = [1.0 - f for f in low if not math.isclose(f, 0.5)]
    return sorted(set(float(f) for f in low) | set(float(f) for f in high))


def fig_entlength(cfg: RunConfig, map_fn=map):
    _check_axis(cfg, ("filling",))
    M, t, T = cfg.values["lattice.M"], cfg.values["lattice.t"], cfg.values["lattice.T"]
    fills = grid(cfg, "filling") if (cfg.values["grid.filling"] or cfg.sweep) else \
        default_entlength_fillings(M, t)
    sweep = entanglement_length_sweep(M, t, T, fills, tail=cfg.values["fit.max_filling"],
                                      map_fn=map_fn)
    rows = [(r.nbar, r.inverse_filling, r.r_e_projected, r.r_e_spin) for r in sweep.rows]
    table = ResultTable(("filling", "inv_filling", "r_e_projected", "r_e_spin"), rows)
    table.note("fit_max_filling", cfg.values["fit.max_filling"])
    table.note("fit_slope", sweep.slope)
    table.note("fit_intercept", sweep.intercept)
    table.note("fit_r_squared", sweep.r_squared)
    return table, PlotSpec("inv_filling", ("r_e_projected", "r_e_spin"))


# ---------------------------------------------------------------------------
# generic computation

COMPUTE_AXES = ("model.U", "model.t", "ensemble.T", "ensemble.mu")
COMPUTE_KEYS = {**MODEL_KEYS, **ENSEMBLE_KEYS, **PARTITION_KEYS, **COMMON_KEYS,
                "compute.measure": Param(_choice("eof", "negativity"), "eof")}


def _compute_state(values: dict):
    fam, M, t, U, N = (values[k] for k in ("model.family", "model.M", "model.t", "model.U", "model.N"))
    periodic, kind = values["model.periodic"], values["ensemble.type"]
    T, mu = values["ensemble.T"], values["ensemble.mu"]
    if kind == "grand-canonical":
        if fam not in ("spinful-fermion-lattice", "hubbard-dimer"):
            raise ConfigError("grand-canonical states are available for spinful fermions only")
        H = spinful_fermion_lattice(M, t, periodic and fam != "hubbard-dimer", N=None, U=U)
        return grand_canonical_state(H, number_operator(H.basis), T, mu)
    if fam == "bose-hubbard-ring":
        H = bose_hubbard_ring(M, t, U, _need_n(N, fam))
    elif fam == "spinless-fermion-ring":
        H = spinless_fermion_ring(M, t, _need_n(N, fam), periodic)
    elif fam == "hubbard-dimer":
        H = hubbard_dimer(t, U, 2 if N is None else N)
    else:
        H = spinful_fermion_lattice(M, t, periodic, N=_need_n(N, fam), U=U)
    if kind == "ground":
        return ground_state(H).mixture
    return canonical_state(H, T)


def _need_n(N, family):
    if N is None:
        raise ConfigError(f"model.N is required for {family} unless the ensemble is grand-canonical")
    return N


def validate_compute(cfg: RunConfig) -> None:
    """Catch model and ensemble problems before any sweep work starts."""
    _check_axis(cfg, COMPUTE_AXES)
    values = cfg.values
    if cfg.sweep is not None and cfg.sweep.axis == "ensemble.T" and min(cfg.sweep.values()) < 0:
        raise ConfigError("temperatures in the sweep must be non-negative")
    fam, M, N = values["model.family"], values["model.M"], values["model.N"]
    if values["ensemble.type"] == "grand-canonical":
        if fam not in ("spinful-fermion-lattice", "hubbard-dimer"):
            raise ConfigError("grand-canonical states are available for spinful fermions only")
        return
    if fam == "hubbard-dimer":
        return
    n = _need_n(N, fam)
    modes = 2 * M if fam == "spinful-fermion-lattice" else M
    if n < 0 or (fam != "bose-hubbard-ring" and n > modes):
        raise ConfigError(f"model.N = {n} is impossible for {modes} fermion modes")


def compute(cfg: RunConfig, map_fn=map):
    validate_compute(cfg)
    measure = cfg.values["compute.measure"]
    axis = cfg.sweep.axis if cfg.sweep is not None else None
    points = [float(v) for v in cfg.sweep.values()] if axis else [None]

    def row(value):
        values = dict(cfg.values)
        if axis:
            values[axis] = value
        rho = _compute_state(values)
        rep = entanglement_of_particles(rho, cfg.partition, measure=measure)
        p11, e11 = one_one(rep)
        neg = entanglement_of_modes(rho, cfg.partition, "negativity")
        return ((value,) if axis else ()) + (rep.total, p11, e11, neg)

    cols = ((axis,) if axis else ()) + ("E_P", "P11", "E_11", "negativity_modes")
    table = ResultTable(cols, list(map_fn(row, points)))
    table.note("measure", measure)
    return table, PlotSpec(axis or "E_P", ("E_P", "P11"))


COMMANDS = {
    "fig-bose-ground": (fig_bose_ground, BOSE_GROUND_KEYS, False),
    "fig-bose-thermal": (fig_bose_thermal, BOSE_THERMAL_KEYS, False),
    "fig-dimer": (fig_dimer, DIMER_KEYS, False),
    "fig-lattice-cool": (fig_lattice_cool, LATTICE_COOL_KEYS, False),
    "fig-filling": (fig_filling, FILLING_KEYS, False),
    "fig-entlength": (fig_entlength, ENTLENGTH_KEYS, False),
    "compute": (compute, COMPUTE_KEYS, True),
}
