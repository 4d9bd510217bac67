"""Finite lattice graphs: shelled d-dimensional boxes and slab graphs.

Every graph is a frozen collection of index arrays.  Vertices are numbered
0..V-1 in lexicographic coordinate order, edges 0..E-1 sorted by
(min endpoint, max endpoint), so rebuilding with the same parameters gives
byte-identical structures.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

# edge classes
HORIZONTAL = 0  # same layer (all cubic edges are horizontal)
VERTICAL = 1    # between adjacent layers of a slab
PERIODIC = 2    # layer 0 <-> layer N-1 of a periodic slab

#: default cap on d * (extent)^d (cubic) or 3 * V (slabs)
VERTEX_BUDGET = 4_000_000


class GraphTooLargeError(ValueError):
    """Requested graph exceeds the configured vertex budget."""


class GraphBuildError(ValueError):
    """Invalid construction parameters (e.g. degenerate periodic edges)."""


@dataclass(frozen=True)
class LatticeGraph:
    """Immutable vertex/edge structure shared read-only by all samplers.

    ``columns`` is a (n_columns, N) index table for slab kinds, one row per
    base coordinate (i, j); ``origin`` is the vertex closest to the box
    center, ``origin_column`` the column containing it.
    """

    kind: str                      # "cubic" | "slab" | "slab_periodic"
    dims: tuple
    n_layers: int                  # 1 for cubic
    coords: np.ndarray             # (V, dim) int64
    edges_u: np.ndarray            # (E,) int64, edges_u[e] < edges_v[e]
    edges_v: np.ndarray
    edge_class: np.ndarray         # (E,) uint8
    boundary: np.ndarray           # sorted vertex indices forming the shell
    boundary_mask: np.ndarray      # (V,) bool
    origin: int
    origin_column: int | None
    columns: np.ndarray | None     # (n_columns, N) int64
    column_coords: np.ndarray | None   # (n_columns, 2) int64
    column_edges_u: np.ndarray | None  # base-adjacency between columns
    column_edges_v: np.ndarray | None
    column_is_rim: np.ndarray | None   # (n_columns,) bool
    # CSR adjacency: for vertex v, entries adj_indptr[v]:adj_indptr[v+1]
    adj_indptr: np.ndarray = field(repr=False, default=None)
    adj_edge: np.ndarray = field(repr=False, default=None)
    adj_nbr: np.ndarray = field(repr=False, default=None)

    @property
    def n_vertices(self):
        return self.coords.shape[0]

    @property
    def n_edges(self):
        return self.edges_u.shape[0]

    @property
    def interior(self):
        """Sorted indices of non-boundary vertices."""
        return np.flatnonzero(~self.boundary_mask)

    @property
    def n_columns(self):
        return 0 if self.columns is None else self.columns.shape[0]

    def degree(self, v):
        return int(self.adj_indptr[v + 1] - self.adj_indptr[v])


def _freeze(a):
    a.setflags(write=False)
    return a


def _finish_graph(kind, dims, n_layers, coords, pairs, classes, boundary_mask,
                  origin, origin_column=None, columns=None, column_coords=None,
                  column_pairs=None, column_is_rim=None):
    """Sort edges by (u, v), build CSR adjacency, freeze all arrays."""
    coords = np.ascontiguousarray(coords, dtype=np.int64)
    n_vertices = coords.shape[0]
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    classes = np.asarray(classes, dtype=np.uint8)
    u = np.minimum(pairs[:, 0], pairs[:, 1])
    v = np.maximum(pairs[:, 0], pairs[:, 1])
    order = np.lexsort((v, u))
    u, v, classes = u[order], v[order], classes[order]
    if u.size != np.unique(u * np.int64(n_vertices) + v).size:
        raise GraphBuildError("duplicate edge generated")

    # CSR over both endpoints, entries sorted by edge index per vertex
    deg = np.bincount(u, minlength=n_vertices) + np.bincount(v, minlength=n_vertices)
    indptr = np.zeros(n_vertices + 1, dtype=np.int64)
    np.cumsum(deg, out=indptr[1:])
    adj_edge = np.empty(indptr[-1], dtype=np.int64)
    adj_nbr = np.empty(indptr[-1], dtype=np.int64)
    cursor = indptr[:-1].copy()
    for e in range(u.size):
        a, b = u[e], v[e]
        adj_edge[cursor[a]] = e
        adj_nbr[cursor[a]] = b
        cursor[a] += 1
        adj_edge[cursor[b]] = e
        adj_nbr[cursor[b]] = a
        cursor[b] += 1

    boundary_mask = np.asarray(boundary_mask, dtype=bool)
    if columns is not None:
        columns = _freeze(np.ascontiguousarray(columns, dtype=np.int64))
        column_coords = _freeze(np.ascontiguousarray(column_coords, dtype=np.int64))
        cp = np.asarray(column_pairs, dtype=np.int64).reshape(-1, 2)
        cu = np.minimum(cp[:, 0], cp[:, 1])
        cv = np.maximum(cp[:, 0], cp[:, 1])
        corder = np.lexsort((cv, cu))
        column_edges_u = _freeze(cu[corder])
        column_edges_v = _freeze(cv[corder])
        column_is_rim = _freeze(np.asarray(column_is_rim, dtype=bool))
    else:
        column_edges_u = column_edges_v = None

    return LatticeGraph(
        kind=kind, dims=tuple(dims), n_layers=n_layers,
        coords=_freeze(coords),
        edges_u=_freeze(u), edges_v=_freeze(v), edge_class=_freeze(classes),
        boundary=_freeze(np.flatnonzero(boundary_mask)),
        boundary_mask=_freeze(boundary_mask),
        origin=int(origin), origin_column=origin_column,
        columns=columns, column_coords=column_coords,
        column_edges_u=column_edges_u, column_edges_v=column_edges_v,
        column_is_rim=column_is_rim,
        adj_indptr=_freeze(indptr), adj_edge=_freeze(adj_edge),
        adj_nbr=_freeze(adj_nbr),
    )


def build_cubic_box(d, side, include_boundary_shell=True, max_cost=VERTEX_BUDGET):
    """Box of ``side``^d interior vertices, optionally wrapped in a shell of
    boundary vertices (one extra layer per face, corners included).

    The origin sits at the box center (floor of the midpoint per axis).
    """
    if d < 1:
        raise GraphBuildError("dimension must be >= 1")
    if side < 1:
        raise GraphBuildError("side must be >= 1")
    extent = side + 2 if include_boundary_shell else side
    if d * extent ** d > max_cost:
        raise GraphTooLargeError(
            f"graph too large: {d} * {extent}^{d} exceeds budget {max_cost}")

    shape = (extent,) * d
    n_vertices = extent ** d
    coords = np.stack(np.unravel_index(np.arange(n_vertices), shape), axis=1)

    pairs = []
    for axis in range(d):
        stride = int(np.prod(shape[axis + 1:], dtype=np.int64))
        has_next = coords[:, axis] < extent - 1
        u = np.flatnonzero(has_next)
        pairs.append(np.stack([u, u + stride], axis=1))
    pairs = np.concatenate(pairs, axis=0)
    classes = np.full(pairs.shape[0], HORIZONTAL, dtype=np.uint8)

    if include_boundary_shell:
        boundary_mask = ((coords == 0) | (coords == extent - 1)).any(axis=1)
    else:
        boundary_mask = np.zeros(n_vertices, dtype=bool)
    center = tuple((extent - 1) // 2 for _ in range(d))
    origin = int(np.ravel_multi_index(center, shape))

    return _finish_graph("cubic", shape, 1, coords, pairs, classes,
                         boundary_mask, origin)


def _slab_from_offsets(n_layers, offsets, rim_flags, periodic_vertical, kind_note):
    """Shared slab assembly from an explicit list of base coordinates."""
    if n_layers < 1:
        raise GraphBuildError("number of layers must be >= 1")
    if periodic_vertical and n_layers < 3:
        raise GraphBuildError(
            "degenerate periodic edge: periodic layers need N >= 3")

    offsets = np.asarray(offsets, dtype=np.int64).reshape(-1, 2)
    order = np.lexsort((offsets[:, 1], offsets[:, 0]))
    offsets = offsets[order]
    rim_flags = np.asarray(rim_flags, dtype=bool)[order]
    n_cols = offsets.shape[0]
    index_of = {(int(i), int(j)): c for c, (i, j) in enumerate(offsets)}
    if len(index_of) != n_cols:
        raise GraphBuildError("duplicate column offset")

    # vertex c*N + k has coords (i, j, k)
    coords = np.empty((n_cols * n_layers, 3), dtype=np.int64)
    coords[:, 0] = np.repeat(offsets[:, 0], n_layers)
    coords[:, 1] = np.repeat(offsets[:, 1], n_layers)
    coords[:, 2] = np.tile(np.arange(n_layers), n_cols)
    columns = np.arange(n_cols * n_layers).reshape(n_cols, n_layers)

    pairs, classes = [], []
    column_pairs = []
    for c, (i, j) in enumerate(offsets):
        for di, dj in ((1, 0), (0, 1)):
            other = index_of.get((int(i) + di, int(j) + dj))
            if other is not None:
                column_pairs.append((c, other))
                for k in range(n_layers):
                    pairs.append((columns[c, k], columns[other, k]))
                    classes.append(HORIZONTAL)
        for k in range(n_layers - 1):
            pairs.append((columns[c, k], columns[c, k + 1]))
            classes.append(VERTICAL)
        if periodic_vertical:
            pairs.append((columns[c, 0], columns[c, n_layers - 1]))
            classes.append(PERIODIC)

    boundary_mask = np.repeat(rim_flags, n_layers)
    # origin column: the one closest to the coordinate average (box center)
    mid = np.floor((offsets.min(axis=0) + offsets.max(axis=0)) / 2).astype(np.int64)
    origin_column = int(np.lexsort(
        (offsets[:, 1], offsets[:, 0],
         np.abs(offsets - mid).sum(axis=1)))[0])
    origin = int(columns[origin_column, 0])

    kind = "slab_periodic" if periodic_vertical else "slab"
    return _finish_graph(kind, kind_note, n_layers, coords, pairs, classes,
                         boundary_mask, origin, origin_column=origin_column,
                         columns=columns, column_coords=offsets,
                         column_pairs=column_pairs, column_is_rim=rim_flags)


def build_slab(n_layers, base_side, periodic_vertical=False, max_cost=VERTEX_BUDGET):
    """Slab graph on an (base_side+2)^2 base of columns, N vertices each.

    The rim of the base square (corners included) is the boundary; vertical
    edges join consecutive layers of a column, and for ``periodic_vertical``
    (N >= 3 only) an extra edge joins layers 0 and N-1.
    """
    if base_side < 1:
        raise GraphBuildError("base_side must be >= 1")
    extent = base_side + 2
    if 3 * extent * extent * n_layers > max_cost:
        raise GraphTooLargeError(
            f"graph too large: slab {extent}x{extent}x{n_layers} exceeds budget {max_cost}")
    offsets = list(itertools.product(range(extent), range(extent)))
    rim = [i == 0 or i == extent - 1 or j == 0 or j == extent - 1
           for i, j in offsets]
    return _slab_from_offsets(n_layers, offsets, rim, periodic_vertical,
                              (extent, extent, n_layers))


def build_slab_region(n_layers, interior_offsets, periodic_vertical=False,
                      max_cost=VERTEX_BUDGET):
    """Slab graph over an explicit set of interior columns.

    The boundary is the set of columns base-adjacent to the interior.  Used
    for exact enumerations over regions smaller than a full box (the interior
    need not be square).
    """
    interior = {(int(i), int(j)) for i, j in interior_offsets}
    if not interior:
        raise GraphBuildError("interior region is empty")
    ring = set()
    for i, j in interior:
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            if (i + di, j + dj) not in interior:
                ring.add((i + di, j + dj))
    offsets = sorted(interior | ring)
    if 3 * len(offsets) * n_layers > max_cost:
        raise GraphTooLargeError("graph too large: region exceeds budget")
    rim = [o in ring for o in offsets]
    return _slab_from_offsets(n_layers, offsets, rim, periodic_vertical,
                              ("region", len(interior), n_layers))


def neighbors(g, v):
    """Deterministically ordered list of (edge index, neighbor) at ``v``."""
    if not 0 <= v < g.n_vertices:
        raise IndexError(f"vertex {v} out of range")
    lo, hi = g.adj_indptr[v], g.adj_indptr[v + 1]
    return [(int(g.adj_edge[i]), int(g.adj_nbr[i])) for i in range(lo, hi)]


def column_index(g, i, j):
    """Index of the column with base coordinates (i, j)."""
    if g.columns is None:
        raise GraphBuildError("cubic graphs have no columns")
    hits = np.flatnonzero((g.column_coords[:, 0] == i) & (g.column_coords[:, 1] == j))
    if hits.size == 0:
        raise KeyError(f"no column at {(i, j)}")
    return int(hits[0])
