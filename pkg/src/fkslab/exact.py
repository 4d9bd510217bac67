"""Closed-form reference values and brute-force enumeration on tiny graphs.

Enumeration walks configurations in fixed binary-code order (code bit i is
the i-th free spin or free edge), so results are bit-reproducible.  Budgets:
at most 24 free spins / free edges (2^24 states); full bond distributions
are materialized only up to 2^20 configurations, larger graphs go through
the census path that aggregates before reweighting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels, clusters, lattice, sampler

MAX_FREE = 24
MAX_MATERIALIZED = 20
_CHUNK = 1 << 18


class EnumerationBudgetError(ValueError):
    """More states than the enumeration budget allows."""


# ---------------------------------------------------------------------------
# closed forms (d = 2 unless stated)

def onsager_magnetization(beta):
    """Spontaneous magnetization of the square-lattice model,
    {1 - sinh(2 beta)^-4}^(1/8}; zero at and below the critical point."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    s = math.sinh(2.0 * beta)
    if s <= 1.0:
        return 0.0
    return (1.0 - s ** -4) ** 0.125


def onsager_magnetization_x(x):
    """Same quantity as a function of x = exp(-2 beta):
    {1 - [2x/(1-x^2)]^4}^(1/8)."""
    if not 0.0 < x < 1.0:
        raise ValueError("x must be in (0, 1)")
    r = 2.0 * x / (1.0 - x * x)
    if r >= 1.0:
        return 0.0
    return (1.0 - r ** 4) ** 0.125


@dataclass(frozen=True)
class LowTempPrediction:
    """Leading low-temperature orders: 1-M ~ 2 x^n, 1-R ~ x^n, n the origin
    degree (n = 4 on the square lattice)."""

    one_minus_m: float
    one_minus_r: float


def low_temp_predictions(x, degree=4):
    if not 0.0 < x < 1.0:
        raise ValueError("x must be in (0, 1)")
    if degree < 1:
        raise ValueError("degree must be >= 1")
    return LowTempPrediction(one_minus_m=2.0 * x ** degree,
                             one_minus_r=x ** degree)


def gap_bound_exponent(d):
    """Edge-count bound 2d(3^d - 1) of the surrounding shell."""
    return 2 * d * (3 ** d - 1)


def theorem_gap_bound(d, p, magnetization):
    """Lower bound on R - |M|:
    (1/2) |M| (p/(2-p))^{2d(3^d-1)} (1-p)^{2d}."""
    if d < 2:
        raise ValueError("d must be >= 2")
    if not 0.0 <= p < 1.0:
        raise ValueError("p must be in [0, 1)")
    m = abs(magnetization)
    if m > 1.0:
        raise ValueError("|magnetization| must be <= 1")
    return 0.5 * m * (p / (2.0 - p)) ** gap_bound_exponent(d) * (1.0 - p) ** (2 * d)


# ---------------------------------------------------------------------------
# exact distributions

@dataclass(frozen=True)
class ExactDistribution:
    """Exhaustive finite-volume distribution over bit-coded configurations."""

    kind: str                  # "spin" | "bond"
    graph: object
    free: np.ndarray           # free vertex indices (spin) or edge indices (bond)
    weights: np.ndarray        # normalized, indexed by configuration code
    partition_value: float     # unnormalized total weight
    meta: dict = field(default_factory=dict, repr=False)

    @property
    def n_free(self):
        return int(self.free.size)

    @property
    def support(self):
        return np.arange(self.weights.size, dtype=np.int64)


def _spin_bits(codes, bit):
    return (2 * ((codes >> bit) & 1) - 1).astype(np.int8)


def enumerate_gibbs(g, params, boundary=None):
    """Exact spin distribution of the finite-volume Gibbs measure.

    Free spins are the interior vertices (plus/minus boundary) or all
    vertices (free boundary); weight is exp(beta * sum_e J_e s_u s_v) over
    every edge of the graph.
    """
    mode = boundary if boundary is not None else params.boundary
    if mode == "plus":
        free, fixed_value = g.interior, 1
    elif mode == "minus":
        free, fixed_value = g.interior, -1
    elif mode == "free":
        free, fixed_value = np.arange(g.n_vertices), 0
    else:
        raise ValueError("spin enumeration needs plus, minus, or free boundary")
    n = free.size
    if n > MAX_FREE:
        raise EnumerationBudgetError(f"too many spins: {n} free > {MAX_FREE}")

    template = np.full(g.n_vertices, fixed_value, dtype=np.int8)
    template[free] = 0
    pos = np.full(g.n_vertices, -1, dtype=np.int64)
    pos[free] = np.arange(n)
    j_edge = sampler.edge_couplings(g, params)

    n_codes = 1 << n
    weights = np.empty(n_codes, dtype=np.float64)
    log_w = np.empty(n_codes, dtype=np.float64)
    for lo in range(0, n_codes, _CHUNK):
        codes = np.arange(lo, min(lo + _CHUNK, n_codes), dtype=np.int64)
        energy = np.zeros(codes.size, dtype=np.float64)
        const = 0.0
        for e in range(g.n_edges):
            u, v = g.edges_u[e], g.edges_v[e]
            pu, pv = pos[u], pos[v]
            if pu >= 0 and pv >= 0:
                energy += j_edge[e] * _spin_bits(codes, pu) * _spin_bits(codes, pv)
            elif pu >= 0:
                energy += (j_edge[e] * template[v]) * _spin_bits(codes, pu)
            elif pv >= 0:
                energy += (j_edge[e] * template[u]) * _spin_bits(codes, pv)
            else:
                const += j_edge[e] * template[u] * template[v]
        log_w[lo:lo + codes.size] = params.beta * (energy + const)
    peak = log_w.max()
    np.exp(log_w - peak, out=weights)
    scaled_total = float(weights.sum())
    weights /= scaled_total
    partition_value = scaled_total * math.exp(peak) if peak < 700 else math.inf
    return ExactDistribution(kind="spin", graph=g, free=free, weights=weights,
                             partition_value=partition_value,
                             meta={"template": template, "pos": pos,
                                   "boundary_mode": mode, "beta": params.beta})


def decode_spins(dist, codes=None):
    """Full (n_configs, V) spin matrix for the given configuration codes."""
    if dist.kind != "spin":
        raise ValueError("not a spin distribution")
    if codes is None:
        codes = dist.support
    codes = np.asarray(codes, dtype=np.int64)
    out = np.tile(dist.meta["template"], (codes.size, 1))
    for i, v in enumerate(dist.free):
        out[:, v] = _spin_bits(codes, i)
    return out


def spin_expectation(dist, v):
    """Exact expectation of the spin at vertex v."""
    p = dist.meta["pos"][v]
    if p < 0:
        return float(dist.meta["template"][v])
    bit = (dist.support >> int(p)) & 1
    return float(np.sum(dist.weights * (2 * bit - 1)))


def probability(dist, event, vectorized=False):
    """Exact probability of an event over spin configurations.

    ``event`` maps one sigma row (or, with vectorized=True, an
    (n_chunk, V) matrix) to bool.
    """
    total = 0.0
    for lo in range(0, dist.weights.size, _CHUNK):
        codes = np.arange(lo, min(lo + _CHUNK, dist.weights.size), dtype=np.int64)
        spins = decode_spins(dist, codes)
        if vectorized:
            hit = np.asarray(event(spins), dtype=bool)
        else:
            hit = np.fromiter((bool(event(row)) for row in spins),
                              count=codes.size, dtype=bool)
        total += float(dist.weights[codes[hit]].sum())
    return total


def column_sum_matrix(dist, codes=None):
    """(n_configs, n_columns) spin sums per column for slab graphs."""
    g = dist.graph
    if g.columns is None:
        raise ValueError("column sums need a slab graph")
    spins = decode_spins(dist, codes)
    return spins[:, g.columns].sum(axis=2)


def exact_e_probabilities(dist):
    """(P(E+), P(E-)) for the origin column."""
    sums = column_sum_matrix(dist)[:, dist.graph.origin_column]
    return (float(dist.weights[sums > 0].sum()),
            float(dist.weights[sums < 0].sum()))


def exact_c_y_plus_probability(dist, y_columns):
    """Exact probability that Y is a maximal plus-majority column cluster:
    strict plus majority on Y, non-positive sums on its N-boundary."""
    g = dist.graph
    y = sorted(int(c) for c in y_columns)
    if any(g.column_is_rim[c] for c in y):
        raise ValueError("Y may not touch the rim")
    y_set = set(y)
    ring = set()
    for a, b in zip(g.column_edges_u, g.column_edges_v):
        a, b = int(a), int(b)
        if a in y_set and b not in y_set:
            ring.add(b)
        elif b in y_set and a not in y_set:
            ring.add(a)
    ring = sorted(ring)
    total = 0.0
    for lo in range(0, dist.weights.size, _CHUNK):
        codes = np.arange(lo, min(lo + _CHUNK, dist.weights.size), dtype=np.int64)
        sums = column_sum_matrix(dist, codes)
        ok = (sums[:, y] > 0).all(axis=1) & (sums[:, ring] <= 0).all(axis=1)
        total += float(dist.weights[codes[ok]].sum())
    return total


# ---------------------------------------------------------------------------
# random-cluster enumeration (wired, q = 2)

def _fk_parts(g):
    if g.boundary.size == 0:
        raise ValueError("wired enumeration needs a graph with a boundary shell")
    shell = g.boundary_mask[g.edges_u] & g.boundary_mask[g.edges_v]
    free_edges = np.flatnonzero(~shell)
    forced = np.flatnonzero(shell)
    return free_edges, forced


def _popcounts(m):
    codes = np.arange(1 << m, dtype=np.int64)
    o = np.zeros(codes.size, dtype=np.int64)
    for b in range(m):
        o += (codes >> b) & 1
    return o


def enumerate_fk(g, params):
    """Exact wired random-cluster distribution over the non-shell edges.

    Weight p^{open}(1-p)^{closed} 2^{k}, k counting clusters with every
    boundary-touching cluster merged into one (shell edges held open).
    """
    free_edges, forced = _fk_parts(g)
    m = free_edges.size
    if m > MAX_FREE:
        raise EnumerationBudgetError(f"too many edges: {m} free > {MAX_FREE}")
    if m > MAX_MATERIALIZED:
        raise EnumerationBudgetError(
            f"{m} free edges exceed the materialized-distribution cap "
            f"{MAX_MATERIALIZED}; use fk_census / fk_span_probability")

    k = np.empty(1 << m, dtype=np.int16)
    span = np.empty(1 << m, dtype=np.uint8)
    _kernels.fk_enumerate(g.n_vertices,
                          g.edges_u[free_edges], g.edges_v[free_edges],
                          g.edges_u[forced], g.edges_v[forced],
                          g.boundary, g.origin, k, span)
    p_edge = sampler.edge_open_probabilities(g, params)[free_edges]
    log_w = k.astype(np.float64) * math.log(2.0)
    codes = np.arange(1 << m, dtype=np.int64)
    for i in range(m):
        bit = (codes >> i) & 1
        log_w += np.where(bit == 1, _safe_log(float(p_edge[i])),
                          _safe_log(1.0 - float(p_edge[i])))
    peak = log_w.max()
    weights = np.exp(log_w - peak)
    scaled_total = float(weights.sum())
    weights /= scaled_total
    return ExactDistribution(
        kind="bond", graph=g, free=free_edges, weights=weights,
        partition_value=scaled_total * math.exp(peak),
        meta={"k": k, "span": span, "forced": forced, "beta": params.beta})


def decode_bonds(dist, codes=None):
    """Full (n_configs, E) bond matrix; forced shell edges are open."""
    if dist.kind != "bond":
        raise ValueError("not a bond distribution")
    if codes is None:
        codes = dist.support
    codes = np.asarray(codes, dtype=np.int64)
    g = dist.graph
    out = np.zeros((codes.size, g.n_edges), dtype=np.uint8)
    out[:, dist.meta["forced"]] = 1
    for i, e in enumerate(dist.free):
        out[:, e] = ((codes >> i) & 1).astype(np.uint8)
    return out


def fk_span_probability_from_distribution(dist):
    return float(dist.weights[dist.meta["span"] == 1].sum())


@dataclass(frozen=True)
class FkCensus:
    """Reusable (open-horizontal, open-vertical, clusters, span) histogram."""

    graph: object
    free_edges: np.ndarray
    hist: np.ndarray           # (m+1, m+1, V+1, 2) int64 counts
    m_horizontal: int
    m_vertical: int


def fk_census(g):
    """One exact pass usable for any beta afterwards; free edges <= 24."""
    free_edges, forced = _fk_parts(g)
    m = free_edges.size
    if m > MAX_FREE:
        raise EnumerationBudgetError(f"too many edges: {m} free > {MAX_FREE}")
    is_vertical = (g.edge_class[free_edges] != lattice.HORIZONTAL).astype(np.uint8)
    hist = _kernels.fk_census(g.n_vertices,
                              g.edges_u[free_edges], g.edges_v[free_edges],
                              g.edges_u[forced], g.edges_v[forced],
                              g.boundary, g.origin, is_vertical)
    return FkCensus(graph=g, free_edges=free_edges, hist=hist,
                    m_horizontal=int(np.sum(is_vertical == 0)),
                    m_vertical=int(np.sum(is_vertical == 1)))


def _binomial_log_weights(counts, m_total, p):
    """log p^o (1-p)^(m-o) for o = 0..len-1, with the 0*log(0) = 0
    convention so p = 0 and p = 1 stay exact."""
    o = np.arange(counts, dtype=np.float64)
    with np.errstate(invalid="ignore"):
        open_part = np.where(o > 0, o * _safe_log(p), 0.0)
        closed_part = np.where(m_total - o > 0,
                               (m_total - o) * _safe_log(1.0 - p), 0.0)
    return np.where(o <= m_total, open_part + closed_part, -np.inf)


def fk_span_probability(g, params, census=None):
    """Exact P(origin joins the boundary) under the wired FK measure."""
    if census is None:
        census = fk_census(g)
    p_h = sampler.p_from_beta(params.beta, params.j_horizontal)
    p_v = sampler.p_from_beta(params.beta, params.j_vertical)
    log_h = _binomial_log_weights(census.hist.shape[0], census.m_horizontal, p_h)
    log_v = _binomial_log_weights(census.hist.shape[1], census.m_vertical, p_v)
    k = np.arange(census.hist.shape[2], dtype=np.float64)
    log_w = (log_h[:, None, None, None] + log_v[None, :, None, None]
             + (k * math.log(2.0))[None, None, :, None])
    log_w = np.broadcast_to(log_w, census.hist.shape)
    mask = census.hist > 0
    peak = log_w[mask].max()
    with np.errstate(invalid="ignore"):
        w = np.where(mask, census.hist * np.exp(log_w - peak), 0.0)
    total = w.sum()
    return float(w[:, :, :, 1].sum() / total)


def _safe_log(x):
    return math.log(x) if x > 0 else -math.inf


# ---------------------------------------------------------------------------
# verification reports

@dataclass(frozen=True)
class CouplingIdentityReport:
    beta: float
    magnetization_exact: float
    fk_span_exact: float
    abs_difference: float
    tolerance: float
    passed: bool


def verify_coupling_identities(g, params, tol=1e-10, census=None):
    """Exact check that M(plus) equals P_fk(origin <-> boundary)."""
    dist = enumerate_gibbs(g, params, boundary="plus")
    m_exact = spin_expectation(dist, g.origin)
    span = fk_span_probability(g, params, census=census)
    diff = abs(m_exact - span)
    return CouplingIdentityReport(beta=params.beta, magnetization_exact=m_exact,
                                  fk_span_exact=span, abs_difference=diff,
                                  tolerance=tol, passed=diff <= tol)


@dataclass(frozen=True)
class Eq4Report:
    beta: float
    max_deviation: float
    n_checked: int
    tolerance: float
    passed: bool


def verify_eq4_conditionals(g, params, tol=1e-12):
    """Every exact single-edge conditional equals p (endpoints joined without
    the edge) or p/(2-p) (not joined), for every free edge and every
    configuration of the remaining edges."""
    dist = enumerate_fk(g, params)
    m = dist.n_free
    p_edge = sampler.edge_open_probabilities(g, params)[dist.free]
    weights = dist.weights
    worst = 0.0
    checked = 0
    for i in range(m):
        e = int(dist.free[i])
        p = float(p_edge[i])
        stride = 1 << i
        codes = dist.support
        low = codes[(codes >> i) & 1 == 0]
        w0 = weights[low]
        w1 = weights[low + stride]
        cond = w1 / (w0 + w1)
        rest = decode_bonds(dist, low)
        for r_idx in range(low.size):
            omega = rest[r_idx]
            omega[e] = 0
            joined = clusters.connected_without_edge(g, omega, e)
            expect = p if joined else p / (2.0 - p)
            worst = max(worst, abs(float(cond[r_idx]) - expect))
            checked += 1
    return Eq4Report(beta=params.beta, max_deviation=worst, n_checked=checked,
                     tolerance=tol, passed=worst <= tol)


@dataclass(frozen=True)
class ImplNpianiReport:
    beta: float
    mu_plus: float
    mu_minus: float
    tolerance: float
    passed: bool

    @property
    def margin(self):
        return self.mu_minus - self.mu_plus


def verify_impl_npiani(g, y_columns, params, tol=1e-12):
    """Exact mu_plus(C_Y^+) and mu_minus(C_Y^+); the inequality asserts the
    plus value is no larger (up to tolerance for roundoff)."""
    plus = enumerate_gibbs(g, params, boundary="plus")
    minus = enumerate_gibbs(g, params, boundary="minus")
    mu_p = exact_c_y_plus_probability(plus, y_columns)
    mu_m = exact_c_y_plus_probability(minus, y_columns)
    return ImplNpianiReport(beta=params.beta, mu_plus=mu_p, mu_minus=mu_m,
                            tolerance=tol, passed=mu_p <= mu_m + tol)


@dataclass(frozen=True)
class RotationReport:
    beta: float
    max_dev_rotation: float
    max_dev_reflection: float
    tolerance: float
    rotation_invariant: bool
    reflection_invariant: bool


def _permuted_codes(dist, layer_map):
    """Configuration codes after permuting layers within every column."""
    g = dist.graph
    n_layers = g.n_layers
    pos = dist.meta["pos"]
    codes = dist.support
    out = np.zeros_like(codes)
    for i, v in enumerate(dist.free):
        c, k = divmod(int(v), n_layers)
        target = g.columns[c, layer_map[k]]
        t = int(pos[target])
        if t < 0:
            raise ValueError("layer permutation leaves the free set")
        out |= ((codes >> i) & 1) << t
    return out


def verify_rotation_invariance(g, params, tol=1e-12):
    """Exact distribution compared against layer rotation k -> k+1 (mod N)
    and layer reflection k -> N-1-k."""
    if g.columns is None or g.n_layers < 2:
        raise ValueError("rotation check needs a slab with >= 2 layers")
    dist = enumerate_gibbs(g, params)
    n = g.n_layers
    rot = [(k + 1) % n for k in range(n)]
    ref = [n - 1 - k for k in range(n)]
    dev_rot = float(np.abs(dist.weights[_permuted_codes(dist, rot)]
                           - dist.weights).max())
    dev_ref = float(np.abs(dist.weights[_permuted_codes(dist, ref)]
                           - dist.weights).max())
    return RotationReport(beta=params.beta, max_dev_rotation=dev_rot,
                          max_dev_reflection=dev_ref, tolerance=tol,
                          rotation_invariant=dev_rot <= tol,
                          reflection_invariant=dev_ref <= tol)
