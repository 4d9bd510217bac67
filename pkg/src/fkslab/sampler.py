"""Samplers for the coupled spin/bond measure and its two marginals.

The cluster sweep alternates the two conditional constructions: bonds given
spins (equal-spin edges open independently with probability p_e, boundary
shell edges forced open unless the boundary is free), then spins given bonds
(boundary-touching clusters take the boundary sign, every other cluster a
fair coin).  Single-edge random-cluster heat bath and single-site Glauber
dynamics are kept as independent cross-checking chains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels, clusters, lattice, observables

BOUNDARY_MODES = ("plus", "minus", "free", "wired-bond")
_MODE_CODE = {"free": _kernels.MODE_FREE, "plus": _kernels.MODE_PLUS,
              "minus": _kernels.MODE_MINUS, "wired-bond": _kernels.MODE_WIRED}

#: generator recorded in output provenance; period 2^128
GENERATOR_NAME = "PCG64"


class ChainError(RuntimeError):
    """An observer or invariant failed while a chain was running."""


@dataclass(frozen=True)
class ModelParams:
    """Inverse temperature, couplings per edge class, boundary condition."""

    beta: float
    j_horizontal: float = 1.0
    j_vertical: float = 1.0
    boundary: str = "plus"

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.j_horizontal <= 0 or self.j_vertical <= 0:
            raise ValueError("couplings must be positive (ferromagnetic)")
        if self.boundary not in BOUNDARY_MODES:
            raise ValueError(f"boundary must be one of {BOUNDARY_MODES}")

    def with_boundary(self, boundary):
        return replace(self, boundary=boundary)


def p_from_beta(beta, coupling=1.0):
    """Open probability 1 - exp(-2 beta J) of an equal-spin edge."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    return -math.expm1(-2.0 * beta * coupling)


def edge_couplings(g, params):
    """Per-edge J: horizontal edges take j_horizontal, vertical and periodic
    edges j_vertical."""
    j = np.where(g.edge_class == lattice.HORIZONTAL,
                 params.j_horizontal, params.j_vertical)
    return j.astype(np.float64)


def edge_open_probabilities(g, params):
    return -np.expm1(-2.0 * params.beta * edge_couplings(g, params))


def forced_open_mask(g, params):
    """Edges held open by the boundary condition: both endpoints in the
    shell, for every mode except free."""
    if params.boundary == "free":
        return np.zeros(g.n_edges, dtype=bool)
    return g.boundary_mask[g.edges_u] & g.boundary_mask[g.edges_v]


def boundary_sign(params):
    """Forced boundary spin, or None when no spin is pinned."""
    if params.boundary == "plus":
        return 1
    if params.boundary == "minus":
        return -1
    return None


@dataclass
class CouplingState:
    """A consistent (sigma, omega) pair plus its generator."""

    sigma: np.ndarray            # (V,) int8 in {-1, +1}
    omega: np.ndarray            # (E,) uint8
    rng: np.random.Generator
    sweep_count: int = 0


def initial_state(g, params, seed):
    """All spins at the boundary sign (or +1), only forced edges open."""
    sign = boundary_sign(params)
    sigma = np.full(g.n_vertices, 1 if sign is None else sign, dtype=np.int8)
    omega = forced_open_mask(g, params).astype(np.uint8)
    return CouplingState(sigma=sigma, omega=omega,
                         rng=np.random.default_rng(seed))


def bond_update_given_spins(g, state, params):
    """Resample omega given sigma, in place.

    Each non-forced edge closes when its endpoints disagree and opens with
    probability p_e when they agree; forced shell edges stay open.
    """
    p = edge_open_probabilities(g, params)
    u = state.rng.random(g.n_edges)
    same = state.sigma[g.edges_u] == state.sigma[g.edges_v]
    omega = (same & (u < p)) | forced_open_mask(g, params)
    state.omega[:] = omega.astype(np.uint8)
    return state


def spin_update_given_bonds(g, state, params, return_labeling=False):
    """Resample sigma given omega, in place.

    Boundary-touching open clusters take the boundary sign; every other
    cluster gets one fair coin, constant across the cluster.  Free boundary
    assigns coins to all clusters; wired-bond shares a single coin across
    the (wired) boundary clusters.
    """
    wire = params.boundary != "free"
    lab = clusters.label_open_clusters(g, state.omega, wire_boundary=wire,
                                       generation=state.sweep_count)
    u = state.rng.random(g.n_vertices)
    coin = np.where(u < 0.5, 1, -1).astype(np.int8)
    sigma = coin[lab.root]
    sign = boundary_sign(params)
    if sign is not None:
        forced = lab.touches_boundary[lab.root]
        sigma[forced] = sign
    state.sigma[:] = sigma
    if return_labeling:
        return state, lab
    return state


def sw_sweep(g, state, params, return_labeling=False):
    """One full cluster sweep: bonds given spins, then spins given bonds."""
    bond_update_given_spins(g, state, params)
    out = spin_update_given_bonds(g, state, params, return_labeling)
    state.sweep_count += 1
    return out


def check_es_constraint(g, state):
    """Number of open edges whose endpoints disagree (must be zero)."""
    bad = (state.omega != 0) & (state.sigma[g.edges_u] != state.sigma[g.edges_v])
    return int(np.count_nonzero(bad))


def fk_heatbath_edge(g, omega, e, params, rng):
    """Heat-bath refresh of a single edge of the wired random-cluster chain.

    The edge opens with probability p_e when its endpoints are already joined
    without it, else p_e/(2 - p_e); in place.
    """
    if forced_open_mask(g, params)[e]:
        raise ValueError(f"edge {e} is held open by the boundary condition")
    p = p_from_beta(params.beta, float(edge_couplings(g, params)[e]))
    wired = params.boundary != "free"
    if clusters.connected_without_edge(g, omega, e, wired=wired):
        p_open = p
    else:
        p_open = p / (2.0 - p)
    omega[e] = 1 if rng.random() < p_open else 0
    return omega


def fk_heatbath_sweep(g, omega, params, rng):
    """One heat-bath pass over all non-forced edges, in edge order."""
    forced = forced_open_mask(g, params)
    for e in np.flatnonzero(~forced):
        fk_heatbath_edge(g, omega, int(e), params, rng)
    return omega


def glauber_spin_site(g, sigma, v, params, rng):
    """Single-site heat bath: sigma_v = +1 with probability
    e^{beta h} / (e^{beta h} + e^{-beta h}), h the coupling-weighted
    neighbor field; in place."""
    j = edge_couplings(g, params)
    h = 0.0
    for i in range(g.adj_indptr[v], g.adj_indptr[v + 1]):
        h += j[g.adj_edge[i]] * sigma[g.adj_nbr[i]]
    p_plus = 1.0 / (1.0 + math.exp(-2.0 * params.beta * h))
    sigma[v] = 1 if rng.random() < p_plus else -1
    return sigma


def glauber_sweep(g, state, params):
    """Sequential Glauber pass over the interior (boundary spins pinned)."""
    sites = g.interior if boundary_sign(params) is not None else np.arange(g.n_vertices)
    u = state.rng.random(sites.size)
    j = edge_couplings(g, params)
    two_beta = 2.0 * params.beta
    for i, v in enumerate(sites):
        h = 0.0
        for a in range(g.adj_indptr[v], g.adj_indptr[v + 1]):
            h += j[g.adj_edge[a]] * state.sigma[g.adj_nbr[a]]
        p_plus = 1.0 / (1.0 + math.exp(-two_beta * h))
        state.sigma[v] = 1 if u[i] < p_plus else -1
    state.sweep_count += 1
    return state


@dataclass(frozen=True)
class Schedule:
    """burn_in and sweeps count performed sweeps; every thin-th post-burn-in
    sweep is retained."""

    burn_in: int
    sweeps: int
    thin: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.burn_in < 0 or self.sweeps <= 0 or self.thin <= 0:
            raise ValueError("schedule entries must be positive")

    @property
    def n_records(self):
        return self.sweeps // self.thin


def default_burn_in(g):
    """10 sweeps per unit of box side; raise it near criticality."""
    side = max(g.dims[0] if isinstance(g.dims[0], int) else 0, 1)
    return 10 * side


def run_chain(g, params, schedule, observers=None):
    """Reference chain driver: yields one record dict per retained sweep.

    ``observers`` maps names to callables (g, state, bond_labeling) -> value
    and defaults to the standard observable set for the graph kind.  An
    observer exception aborts the chain with a ChainError naming it.
    """
    if observers is None:
        observers = observables.standard_observers(g)
    state = initial_state(g, params, schedule.seed)
    for _ in range(schedule.burn_in):
        sw_sweep(g, state, params)
    for s in range(1, schedule.sweeps + 1):
        _, lab = sw_sweep(g, state, params, return_labeling=True)
        if s % schedule.thin != 0:
            continue
        bad = check_es_constraint(g, state)
        if bad:
            raise ChainError(f"ES constraint violated on {bad} edges at sweep {s}")
        record = {"sweep": state.sweep_count}
        for name, fn in observers.items():
            try:
                record[name] = fn(g, state, lab)
            except Exception as exc:
                raise ChainError(
                    f"observer {name!r} failed at sweep {s}: {exc}") from exc
        yield record


def run_chain_table(g, params, schedule, block_size=512, record_codes=False,
                    validate=False, with_plus_span=True):
    """Fused-kernel chain driver: column arrays of the standard observables.

    Matches run_chain's randomness exactly at block_size=1; larger blocks
    draw the same uniforms in a different order (same law, still
    deterministic for the seed).  Returns a dict of numpy columns keyed by
    observable name, plus "sweep" and, with record_codes, "spin_code" /
    "bond_code" bit codes over the interior vertices / non-forced edges.
    ``validate`` asserts the ES constraint edge by edge every sweep (test
    mode); ``with_plus_span=False`` skips the sign-cluster labeling when the
    plus_span column is not needed.
    """
    state = initial_state(g, params, schedule.seed)
    p_edge = edge_open_probabilities(g, params)
    forced = forced_open_mask(g, params).astype(np.uint8)
    mode = _MODE_CODE[params.boundary]
    base_parent = np.arange(g.n_vertices, dtype=np.int32)
    base_size = np.ones(g.n_vertices, dtype=np.int32)
    if params.boundary != "free" and g.boundary.size > 0:
        b0 = np.int32(g.boundary[0])
        base_parent[g.boundary] = b0
        base_size[g.boundary] = 0
        base_size[b0] = g.boundary.size
    if g.columns is not None:
        columns = g.columns
        origin_col = g.origin_column
        col_eu, col_ev = g.column_edges_u, g.column_edges_v
        col_rim = g.column_is_rim.astype(np.uint8)
    else:
        columns = np.empty((0, 1), dtype=np.int64)
        origin_col = 0
        col_eu = col_ev = np.empty(0, dtype=np.int64)
        col_rim = np.empty(0, dtype=np.uint8)
    interior = g.interior
    free_edges = np.flatnonzero(forced == 0)
    if record_codes and (interior.size > 62 or free_edges.size > 62):
        raise ValueError("bit codes need <= 62 interior vertices and free edges")

    names = observables.names_for(g)
    total = schedule.burn_in + schedule.sweeps
    kept = np.empty((schedule.n_records, 6), dtype=np.int8)
    kept_codes = (np.empty((schedule.n_records, 2), dtype=np.uint64)
                  if record_codes else None)
    done = 0
    retained = 0
    while done < total:
        b = min(block_size, total - done)
        edge_rand = state.rng.random((b, g.n_edges))
        vert_rand = state.rng.random((b, g.n_vertices))
        obs = np.empty((b, 6), dtype=np.int8)
        codes = np.empty((b, 2), dtype=np.uint64)
        violations = _kernels.sw_block(
            g.edges_u, g.edges_v, p_edge, forced, g.boundary, mode, g.origin,
            base_parent, base_size,
            columns, origin_col, col_eu, col_ev, col_rim,
            interior, free_edges, record_codes, validate, with_plus_span,
            state.sigma, state.omega, edge_rand, vert_rand, obs, codes)
        if violations:
            raise ChainError(f"ES constraint violated {violations} times")
        for i in range(b):
            s = done + i + 1
            if s <= schedule.burn_in:
                continue
            if (s - schedule.burn_in) % schedule.thin == 0:
                kept[retained] = obs[i]
                if record_codes:
                    kept_codes[retained] = codes[i]
                retained += 1
        done += b
        state.sweep_count = done

    out = {"sweep": schedule.burn_in
           + schedule.thin * np.arange(1, retained + 1, dtype=np.int64)}
    full = dict(zip(observables.KERNEL_NAMES, kept[:retained].T))
    for name in names:
        if name == "plus_span" and not with_plus_span:
            continue
        if name == "e_class":
            out[name] = observables.decode_e_class(full["column_sign"])
        else:
            out[name] = np.ascontiguousarray(full[name])
    if record_codes:
        out["spin_code"] = kept_codes[:retained, 0].copy()
        out["bond_code"] = kept_codes[:retained, 1].copy()
    if params.boundary == "plus":
        _assert_inclusions(out)
    return out


def _assert_inclusions(table):
    """Per-sample coupling inclusions under plus boundary."""
    if "fk_span" in table and "plus_span" in table:
        if np.any(table["fk_span"] > table["plus_span"]):
            raise ChainError("coupling inclusion violated: fk_span > plus_span")
    if "event_a" in table and "column_sign" in table:
        if np.any((table["event_a"] == 1) & (table["column_sign"] != 1)):
            raise ChainError("slab inclusion violated: event A without E+")


def run_glauber_table(g, params, schedule, block_size=1024, record_codes=False):
    """Fused Glauber chain; returns per-retained-sweep m_origin (and codes).

    Under plus/minus boundary only interior sites are updated; under free
    boundary every vertex is.  Site order within a sweep is the vertex order.
    """
    if params.boundary == "wired-bond":
        raise ValueError("glauber chain needs plus, minus, or free boundary")
    state = initial_state(g, params, schedule.seed)
    sites = g.interior if boundary_sign(params) is not None else np.arange(g.n_vertices)
    if record_codes and sites.size > 62:
        raise ValueError("bit codes need <= 62 updated sites")
    j_adj = np.ascontiguousarray(edge_couplings(g, params)[g.adj_edge])

    total = schedule.burn_in + schedule.sweeps
    kept_m = np.empty(schedule.n_records, dtype=np.int8)
    kept_codes = np.empty(schedule.n_records, dtype=np.uint64)
    done = 0
    retained = 0
    while done < total:
        b = min(block_size, total - done)
        site_rand = state.rng.random((b, sites.size))
        m_out = np.empty(b, dtype=np.int8)
        codes = np.empty(b, dtype=np.uint64)
        _kernels.glauber_block(g.adj_indptr, g.adj_nbr, j_adj, sites,
                               params.beta, g.origin, state.sigma, site_rand,
                               m_out, record_codes, codes)
        for i in range(b):
            s = done + i + 1
            if s <= schedule.burn_in or (s - schedule.burn_in) % schedule.thin:
                continue
            kept_m[retained] = m_out[i]
            if record_codes:
                kept_codes[retained] = codes[i]
            retained += 1
        done += b
        state.sweep_count = done

    out = {"sweep": schedule.burn_in
           + schedule.thin * np.arange(1, retained + 1, dtype=np.int64),
           "m_origin": kept_m[:retained]}
    if record_codes:
        out["spin_code"] = kept_codes[:retained]
    return out
