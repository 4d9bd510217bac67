"""Cluster labeling over a lattice graph under open-edge or same-sign
predicates.

The workhorse is union-find (union by size, path compression, via a numba
kernel); a plain-Python BFS builds the same partition independently and is
used to cross-check the union-find labeling in tests.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from . import _kernels

_EMPTY = np.empty(0, dtype=np.int64)


class StaleLabelingError(RuntimeError):
    """A labeling was queried against a different snapshot generation."""


@dataclass(frozen=True)
class ClusterLabeling:
    """Partition of the vertices of one (graph, predicate) snapshot.

    ``root`` is fully flattened: root[v] is the representative of v's
    component.  ``size`` and ``touches_boundary`` are indexed by root.
    """

    root: np.ndarray               # (V,) int64
    size: np.ndarray               # (V,) int64, size[r] valid at roots
    touches_boundary: np.ndarray   # (V,) bool, valid at roots
    n_clusters: int
    generation: int | None = None

    def find(self, v):
        return int(self.root[v])

    def cluster_size(self, v):
        return int(self.size[self.root[v]])


def _build_labeling(g, active, wire_boundary, generation):
    wire = g.boundary if wire_boundary else _EMPTY
    root = _kernels.uf_roots(g.n_vertices, g.edges_u, g.edges_v,
                             np.ascontiguousarray(active, dtype=np.uint8), wire)
    size = np.bincount(root, minlength=g.n_vertices)
    touch = np.zeros(g.n_vertices, dtype=bool)
    touch[root[g.boundary]] = True
    n_clusters = int(np.count_nonzero(root == np.arange(g.n_vertices)))
    return ClusterLabeling(root=root, size=size, touches_boundary=touch,
                           n_clusters=n_clusters, generation=generation)


def _check_bond_dim(g, omega):
    omega = np.asarray(omega)
    if omega.shape != (g.n_edges,):
        raise ValueError(
            f"bond configuration has shape {omega.shape}, expected ({g.n_edges},)")
    return omega


def _check_spin_dim(g, sigma):
    sigma = np.asarray(sigma)
    if sigma.shape != (g.n_vertices,):
        raise ValueError(
            f"spin configuration has shape {sigma.shape}, expected ({g.n_vertices},)")
    return sigma


def label_open_clusters(g, omega, wire_boundary=False, generation=None):
    """Components of the subgraph of open edges."""
    omega = _check_bond_dim(g, omega)
    return _build_labeling(g, omega != 0, wire_boundary, generation)


def label_sign_clusters(g, sigma, sign, wire_boundary=False, generation=None):
    """Components of the subgraph induced by vertices of the given sign.

    An edge is traversable iff both endpoints carry ``sign``; vertices of the
    opposite sign end up as singletons and belong to no sign cluster.
    """
    if sign not in (-1, 1):
        raise ValueError("sign must be +1 or -1")
    sigma = _check_spin_dim(g, sigma)
    active = (sigma[g.edges_u] == sign) & (sigma[g.edges_v] == sign)
    return _build_labeling(g, active, wire_boundary, generation)


def connected(lab, u, v, generation=None):
    """True iff u and v lie in the same component of the labeling."""
    if generation is not None and lab.generation != generation:
        raise StaleLabelingError(
            f"labeling generation {lab.generation} != expected {generation}")
    return lab.root[u] == lab.root[v]


def origin_touches_boundary(lab, origin, generation=None):
    """True iff the origin's component contains a boundary vertex."""
    if generation is not None and lab.generation != generation:
        raise StaleLabelingError(
            f"labeling generation {lab.generation} != expected {generation}")
    return bool(lab.touches_boundary[lab.root[origin]])


def connected_without_edge(g, omega, e, wired=False):
    """Are e's endpoints joined in omega with e forced closed?

    A fresh breadth-first scan; with ``wired`` the boundary acts as a single
    merged vertex (reaching any boundary vertex reaches them all).
    """
    omega = _check_bond_dim(g, omega)
    if not 0 <= e < g.n_edges:
        raise IndexError(f"edge {e} out of range")
    start, target = int(g.edges_u[e]), int(g.edges_v[e])
    seen = np.zeros(g.n_vertices, dtype=bool)
    seen[start] = True
    queue = deque([start])
    boundary_used = False
    while queue:
        x = queue.popleft()
        if x == target:
            return True
        if wired and g.boundary_mask[x] and not boundary_used:
            boundary_used = True
            for b in g.boundary:
                if not seen[b]:
                    seen[b] = True
                    queue.append(b)
        for i in range(g.adj_indptr[x], g.adj_indptr[x + 1]):
            ei = g.adj_edge[i]
            if ei == e or omega[ei] == 0:
                continue
            y = g.adj_nbr[i]
            if not seen[y]:
                seen[y] = True
                queue.append(y)
    return False


def _bfs_partition(g, active, wire_boundary, generation):
    """Reference labeling by plain BFS; independent of the union-find path."""
    root = np.full(g.n_vertices, -1, dtype=np.int64)
    size = np.zeros(g.n_vertices, dtype=np.int64)
    touch = np.zeros(g.n_vertices, dtype=bool)
    n_clusters = 0
    for s in range(g.n_vertices):
        if root[s] != -1:
            continue
        n_clusters += 1
        members = [s]
        root[s] = s
        queue = deque([s])
        while queue:
            x = queue.popleft()
            if wire_boundary and g.boundary_mask[x]:
                for b in g.boundary:
                    if root[b] == -1:
                        root[b] = s
                        members.append(int(b))
                        queue.append(int(b))
            for i in range(g.adj_indptr[x], g.adj_indptr[x + 1]):
                if not active[g.adj_edge[i]]:
                    continue
                y = int(g.adj_nbr[i])
                if root[y] == -1:
                    root[y] = s
                    members.append(y)
                    queue.append(y)
        size[s] = len(members)
        if any(g.boundary_mask[m] for m in members):
            touch[s] = True
    return ClusterLabeling(root=root, size=size, touches_boundary=touch,
                           n_clusters=n_clusters, generation=generation)


def bfs_open_clusters(g, omega, wire_boundary=False, generation=None):
    omega = _check_bond_dim(g, omega)
    return _bfs_partition(g, omega != 0, wire_boundary, generation)


def bfs_sign_clusters(g, sigma, sign, wire_boundary=False, generation=None):
    sigma = _check_spin_dim(g, sigma)
    active = (sigma[g.edges_u] == sign) & (sigma[g.edges_v] == sign)
    return _bfs_partition(g, active, wire_boundary, generation)


def same_partition(a, b):
    """Exact component-partition equality of two labelings.

    Representatives may differ between methods, so compare by relabeling
    both sides through first-occurrence order.
    """
    if a.root.shape != b.root.shape:
        return False

    def canon(root):
        seen = {}
        out = np.empty_like(root)
        for v, r in enumerate(root):
            out[v] = seen.setdefault(int(r), len(seen))
        return out

    return bool(np.array_equal(canon(a.root), canon(b.root)))
