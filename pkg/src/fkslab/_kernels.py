"""Numba kernels: union-find labeling, fused cluster sweeps, FK enumeration.

Everything here consumes pre-drawn uniforms (randomness lives with the numpy
Generator in the caller) so runs stay deterministic for a given seed.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# boundary interpretation codes for the sweep kernel
MODE_FREE = 0
MODE_PLUS = 1
MODE_MINUS = 2
MODE_WIRED = 3


@njit(cache=True)
def _find(parent, v):
    r = v
    while parent[r] != r:
        r = parent[r]
    while parent[v] != r:
        nxt = parent[v]
        parent[v] = r
        v = nxt
    return r


@njit(cache=True)
def _union(parent, size, a, b):
    ra = _find(parent, a)
    rb = _find(parent, b)
    if ra == rb:
        return
    if size[ra] < size[rb]:
        ra, rb = rb, ra
    parent[rb] = ra
    size[ra] += size[rb]


@njit(cache=True)
def uf_roots(n_vertices, edges_u, edges_v, active, wire):
    """Flattened parent array of the subgraph of active edges.

    ``wire`` vertices are pre-merged into one component (wired boundary).
    """
    parent = np.arange(n_vertices)
    size = np.ones(n_vertices, np.int64)
    for i in range(1, wire.size):
        _union(parent, size, wire[0], wire[i])
    for e in range(edges_u.size):
        if active[e]:
            _union(parent, size, edges_u[e], edges_v[e])
    for v in range(n_vertices):
        parent[v] = _find(parent, v)
    return parent


@njit(cache=True, inline="always")
def _root32(parent, v):
    while parent[v] != v:
        parent[v] = parent[parent[v]]
        v = parent[v]
    return v


@njit(cache=True)
def sw_block(edges_u, edges_v, p_edge, forced, boundary, mode, origin,
             base_parent, base_size,
             columns, origin_col, col_eu, col_ev, col_is_rim,
             interior, free_edges, record_codes, validate, with_plus_span,
             sigma, omega, edge_rand, vert_rand, obs_out, code_out):
    """Run one block of coupled bond/spin sweeps in place.

    Per sweep: refresh bonds given spins (unioning open edges on the fly
    into a union-find forest seeded from ``base_parent``/``base_size``,
    which carry the pre-wired boundary unless the mode is free), repaint
    spins cluster by cluster, then record the standard observables into
    ``obs_out`` rows: [m_origin, fk_span, plus_span, column_sign,
    column_span, event_a].  Root identities follow union-by-size with the
    first argument winning ties, matching uf_roots, so spin painting is
    bit-identical to the stepwise path.  Returns the number of ES
    violations seen when ``validate`` (must be 0).
    """
    n_sweeps = edge_rand.shape[0]
    n_edges = edges_u.size
    n_vertices = sigma.size
    n_cols = columns.shape[0]
    n_layers = columns.shape[1] if n_cols > 0 else 0

    parent = np.empty(n_vertices, np.int32)
    size = np.empty(n_vertices, np.int32)
    touch = np.empty(n_vertices, np.uint8)
    parent2 = np.empty(n_vertices, np.int32)
    size2 = np.empty(n_vertices, np.int32)
    touch2 = np.empty(n_vertices, np.uint8)
    col_sum = np.empty(max(n_cols, 1), np.int64)
    parent_c = np.empty(max(n_cols, 1), np.int32)
    size_c = np.empty(max(n_cols, 1), np.int32)
    touch_c = np.empty(max(n_cols, 1), np.uint8)

    violations = 0
    for b in range(n_sweeps):
        parent[:] = base_parent
        size[:] = base_size

        # bonds given spins: forced edges stay open, equal-spin edges open
        # w.p. p_e; open edges union their endpoints as we go
        for e in range(n_edges):
            u = edges_u[e]
            v = edges_v[e]
            if forced[e] == 1 or (sigma[u] == sigma[v] and edge_rand[b, e] < p_edge[e]):
                omega[e] = 1
                ra = _root32(parent, u)
                rb = _root32(parent, v)
                if ra != rb:
                    if size[ra] < size[rb]:
                        ra, rb = rb, ra
                    parent[rb] = ra
                    size[ra] += size[rb]
            else:
                omega[e] = 0

        for v in range(n_vertices):
            parent[v] = _root32(parent, v)
            touch[v] = 0
        for i in range(boundary.size):
            touch[parent[boundary[i]]] = 1

        # spins given bonds: boundary-touching clusters take the boundary
        # sign, every other cluster a fair coin shared through its root
        if mode == MODE_PLUS:
            for v in range(n_vertices):
                r = parent[v]
                if touch[r] == 1:
                    sigma[v] = 1
                else:
                    sigma[v] = 1 if vert_rand[b, r] < 0.5 else -1
        elif mode == MODE_MINUS:
            for v in range(n_vertices):
                r = parent[v]
                if touch[r] == 1:
                    sigma[v] = -1
                else:
                    sigma[v] = 1 if vert_rand[b, r] < 0.5 else -1
        else:
            for v in range(n_vertices):
                sigma[v] = 1 if vert_rand[b, parent[v]] < 0.5 else -1

        if validate:
            for e in range(n_edges):
                if omega[e] == 1 and sigma[edges_u[e]] != sigma[edges_v[e]]:
                    violations += 1

        # observables
        obs_out[b, 0] = sigma[origin]
        obs_out[b, 1] = touch[parent[origin]]

        if with_plus_span:
            for v in range(n_vertices):
                parent2[v] = v
                size2[v] = 1
                touch2[v] = 0
            for e in range(n_edges):
                if sigma[edges_u[e]] == 1 and sigma[edges_v[e]] == 1:
                    ra = _root32(parent2, edges_u[e])
                    rb = _root32(parent2, edges_v[e])
                    if ra != rb:
                        if size2[ra] < size2[rb]:
                            ra, rb = rb, ra
                        parent2[rb] = ra
                        size2[ra] += size2[rb]
            for i in range(boundary.size):
                if sigma[boundary[i]] == 1:
                    touch2[_root32(parent2, boundary[i])] = 1
            if sigma[origin] == 1 and touch2[_root32(parent2, origin)] == 1:
                obs_out[b, 2] = 1
            else:
                obs_out[b, 2] = 0
        else:
            obs_out[b, 2] = 0

        if n_cols > 0:
            for c in range(n_cols):
                s = 0
                for k in range(n_layers):
                    s += sigma[columns[c, k]]
                col_sum[c] = s
            cs = col_sum[origin_col]
            obs_out[b, 3] = 1 if cs > 0 else (-1 if cs < 0 else 0)

            for c in range(n_cols):
                parent_c[c] = c
                size_c[c] = 1
                touch_c[c] = 0
            for e in range(col_eu.size):
                if col_sum[col_eu[e]] > 0 and col_sum[col_ev[e]] > 0:
                    ra = _root32(parent_c, col_eu[e])
                    rb = _root32(parent_c, col_ev[e])
                    if ra != rb:
                        if size_c[ra] < size_c[rb]:
                            ra, rb = rb, ra
                        parent_c[rb] = ra
                        size_c[ra] += size_c[rb]
            for c in range(n_cols):
                if col_is_rim[c] == 1 and col_sum[c] > 0:
                    touch_c[_root32(parent_c, c)] = 1
            if col_sum[origin_col] > 0 and touch_c[_root32(parent_c, origin_col)] == 1:
                obs_out[b, 4] = 1
            else:
                obs_out[b, 4] = 0

            all_span = 1
            for k in range(n_layers):
                if touch[parent[columns[origin_col, k]]] == 0:
                    all_span = 0
                    break
            obs_out[b, 5] = all_span
        else:
            obs_out[b, 3] = 0
            obs_out[b, 4] = 0
            obs_out[b, 5] = 0

        if record_codes:
            spin_code = np.uint64(0)
            for i in range(interior.size):
                if sigma[interior[i]] == 1:
                    spin_code |= np.uint64(1) << np.uint64(i)
            bond_code = np.uint64(0)
            for i in range(free_edges.size):
                if omega[free_edges[i]] == 1:
                    bond_code |= np.uint64(1) << np.uint64(i)
            code_out[b, 0] = spin_code
            code_out[b, 1] = bond_code

    return violations


@njit(cache=True)
def glauber_block(adj_indptr, adj_nbr, adj_coupling, sites, beta, origin,
                  sigma, site_rand, m_out, record_codes, code_out):
    """Sequential single-site heat-bath sweeps over ``sites``, in place.

    Site order is the array order; one uniform per site per sweep.
    """
    n_sweeps = site_rand.shape[0]
    for b in range(n_sweeps):
        for i in range(sites.size):
            v = sites[i]
            h = 0.0
            for a in range(adj_indptr[v], adj_indptr[v + 1]):
                h += adj_coupling[a] * sigma[adj_nbr[a]]
            p_plus = 1.0 / (1.0 + np.exp(-2.0 * beta * h))
            sigma[v] = 1 if site_rand[b, i] < p_plus else -1
        m_out[b] = sigma[origin]
        if record_codes:
            code = np.uint64(0)
            for i in range(sites.size):
                if sigma[sites[i]] == 1:
                    code |= np.uint64(1) << np.uint64(i)
            code_out[b] = code


@njit(cache=True)
def fk_enumerate(n_vertices, free_eu, free_ev, forced_eu, forced_ev,
                 boundary, origin, k_out, span_out):
    """Exact sweep over all bond configurations on the free edges.

    Writes per configuration the wired cluster count (all boundary-touching
    clusters merged through the pre-wired boundary) and whether the origin
    joins the boundary.  Configuration ``code`` opens free edge i iff bit i
    of code is set; forced edges are always open.
    """
    m = free_eu.size
    base_parent = np.arange(n_vertices)
    base_size = np.ones(n_vertices, np.int64)
    for i in range(1, boundary.size):
        _union(base_parent, base_size, boundary[0], boundary[i])
    for e in range(forced_eu.size):
        _union(base_parent, base_size, forced_eu[e], forced_ev[e])
    for v in range(n_vertices):
        base_parent[v] = _find(base_parent, v)

    parent = np.empty(n_vertices, np.int64)
    size = np.empty(n_vertices, np.int64)
    b0 = boundary[0] if boundary.size > 0 else 0
    for code in range(1 << m):
        for v in range(n_vertices):
            parent[v] = base_parent[v]
            size[v] = base_size[v]
        for i in range(m):
            if (code >> i) & 1:
                _union(parent, size, free_eu[i], free_ev[i])
        k = 0
        for v in range(n_vertices):
            if parent[v] == v:
                k += 1
        k_out[code] = k
        span_out[code] = 1 if _find(parent, origin) == _find(parent, b0) else 0


@njit(cache=True)
def fk_census(n_vertices, free_eu, free_ev, forced_eu, forced_ev,
              boundary, origin, is_vertical):
    """Histogram over all free-edge configurations of (open horizontal
    count, open vertical count, wired cluster count, origin spans).  Counts
    can be reweighted to any (p_horizontal, p_vertical) afterwards.
    """
    m = free_eu.size
    base_parent = np.arange(n_vertices)
    base_size = np.ones(n_vertices, np.int64)
    for i in range(1, boundary.size):
        _union(base_parent, base_size, boundary[0], boundary[i])
    for e in range(forced_eu.size):
        _union(base_parent, base_size, forced_eu[e], forced_ev[e])
    for v in range(n_vertices):
        base_parent[v] = _find(base_parent, v)

    hist = np.zeros((m + 1, m + 1, n_vertices + 1, 2), np.int64)
    parent = np.empty(n_vertices, np.int64)
    size = np.empty(n_vertices, np.int64)
    b0 = boundary[0] if boundary.size > 0 else 0
    for code in range(1 << m):
        for v in range(n_vertices):
            parent[v] = base_parent[v]
            size[v] = base_size[v]
        oh = 0
        ov = 0
        for i in range(m):
            if (code >> i) & 1:
                if is_vertical[i]:
                    ov += 1
                else:
                    oh += 1
                _union(parent, size, free_eu[i], free_ev[i])
        k = 0
        for v in range(n_vertices):
            if parent[v] == v:
                k += 1
        s = 1 if _find(parent, origin) == _find(parent, b0) else 0
        hist[oh, ov, k, s] += 1
    return hist
