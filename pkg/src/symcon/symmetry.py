"""Orbital partition of the automorphism group of a controlled network.

An automorphism of ``(A, B)`` is a node permutation ``P`` with ``PA = AP``
and ``PB = B``.  The orbits of the group they form are the clusters.

The orbits are computed from a generating set found by an
individualization-refinement search:

1. colour nodes by (row of ``B``, diagonal of ``A``, multiset of incident
   weights) and refine to the coarsest equitable colouring;
2. follow a *first path* of individualizations down to a discrete colouring;
3. at every level of that path, walking back up, look for an automorphism
   that maps the individualized node to each other node of its cell (pruned
   by the orbits already known);
4. the orbits of the group generated by everything found are the clusters.

Colours are always renumbered from sorted signatures, so refinement commutes
with relabelling and the search is complete.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import SearchBudgetExceeded
from .netmodel import ControlledNetwork

__all__ = [
    "OrbitalPartition",
    "PartitionCheck",
    "orbital_partition",
    "indicator_matrix",
    "verify_partition",
    "is_automorphism",
    "equitable_refinement",
    "DEFAULT_MAX_BACKTRACK",
]

DEFAULT_MAX_BACKTRACK = 10**6


@dataclass(frozen=True, eq=False)
class OrbitalPartition:
    """Clusters ``C_1..C_K`` as 0-based node tuples, ordered by smallest member.

    ``generators`` holds the automorphisms (as image arrays, ``g[i]`` is the
    image of node ``i``) that justify the clusters; it is empty for a
    partition that was not produced by the search.
    """

    clusters: tuple
    n_nodes: int
    generators: tuple = ()

    def __post_init__(self):
        cl = tuple(tuple(sorted(int(i) for i in c)) for c in self.clusters)
        cl = tuple(sorted((c for c in cl if c), key=lambda c: c[0]))
        seen = sorted(i for c in cl for i in c)
        if seen != list(range(self.n_nodes)):
            raise ValueError("clusters must be disjoint and cover every node exactly once")
        gens = tuple(tuple(int(v) for v in g) for g in self.generators)
        object.__setattr__(self, "clusters", cl)
        object.__setattr__(self, "generators", gens)

    @classmethod
    def from_labels(cls, labels, generators=()) -> "OrbitalPartition":
        labels = np.asarray(labels)
        groups: dict = {}
        for i, lab in enumerate(labels.tolist()):
            groups.setdefault(lab, []).append(i)
        return cls(tuple(groups.values()), len(labels), generators)

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)

    @property
    def sizes(self) -> tuple:
        return tuple(len(c) for c in self.clusters)

    @property
    def cluster_of(self) -> np.ndarray:
        out = np.empty(self.n_nodes, dtype=int)
        for j, c in enumerate(self.clusters):
            out[list(c)] = j
        return out

    @property
    def indicator(self) -> np.ndarray:
        return indicator_matrix(self)

    def __eq__(self, other):
        if not isinstance(other, OrbitalPartition):
            return NotImplemented
        return self.n_nodes == other.n_nodes and self.clusters == other.clusters

    __hash__ = None

    def to_json_dict(self) -> dict:
        """1-based node numbers, matching the network file rows."""
        return {"clusters": [[i + 1 for i in c] for c in self.clusters]}


def indicator_matrix(p: OrbitalPartition) -> np.ndarray:
    """``E[i, j] = 1`` iff node ``i`` belongs to cluster ``j``."""
    E = np.zeros((p.n_nodes, p.n_clusters))
    for j, c in enumerate(p.clusters):
        E[list(c), j] = 1.0
    return E


def is_automorphism(net: ControlledNetwork, perm) -> bool:
    """Exact test of ``P A = A P`` and ``P B = B`` for the node map ``perm``."""
    g = np.asarray(perm, dtype=int)
    A, B = net.adjacency, net.input_pattern
    return bool(np.array_equal(A[np.ix_(g, g)], A) and np.array_equal(B[g], B))


# -- colour refinement ------------------------------------------------------


def _renumber(keys: list) -> np.ndarray:
    order = {k: i for i, k in enumerate(sorted(set(keys)))}
    return np.array([order[k] for k in keys], dtype=int)


class _Refiner:
    def __init__(self, net: ControlledNetwork, use_inputs: bool = True):
        A = net.adjacency
        n = A.shape[0]
        self.n = n
        self.nbrs = []
        self.wts = []
        for i in range(n):
            js = [j for j in np.flatnonzero(A[i]) if j != i]
            self.nbrs.append(np.array(js, dtype=int))
            self.wts.append(tuple(float(A[i, j]) for j in js))
        B = net.input_pattern if use_inputs else np.zeros((n, 0))
        keys = [
            (tuple(B[i].tolist()), float(A[i, i]), tuple(sorted(self.wts[i])))
            for i in range(n)
        ]
        self.initial = _renumber(keys)
        self.calls = 0

    def refine(self, colors: np.ndarray) -> np.ndarray:
        self.calls += 1
        colors = _renumber(list(colors.tolist()))
        k = colors.max() + 1
        while True:
            keys = [
                (int(colors[i]), tuple(sorted(zip(colors[self.nbrs[i]].tolist(), self.wts[i]))))
                for i in range(self.n)
            ]
            new = _renumber(keys)
            k_new = new.max() + 1
            colors = new
            if k_new == k:
                return colors
            k = k_new

    @staticmethod
    def individualize(colors: np.ndarray, v: int) -> np.ndarray:
        keys = [(int(c), 0 if i == v else 1) for i, c in enumerate(colors.tolist())]
        return _renumber(keys)


def equitable_refinement(net: ControlledNetwork, use_inputs: bool = True) -> np.ndarray:
    """Coarsest equitable colouring compatible with the initial node invariants."""
    r = _Refiner(net, use_inputs)
    return r.refine(r.initial)


def _target_cell(colors: np.ndarray) -> Optional[np.ndarray]:
    counts = np.bincount(colors)
    big = np.flatnonzero(counts > 1)
    if big.size == 0:
        return None
    return np.flatnonzero(colors == big[0])


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _search_generators(net: ControlledNetwork, use_inputs: bool, budget: int):
    test = net if use_inputs else ControlledNetwork(net.adjacency, np.zeros((net.n_nodes, 0)))
    ref = _Refiner(net, use_inputs)
    n = net.n_nodes
    expanded = 0

    def tick():
        nonlocal expanded
        expanded += 1
        if expanded > budget:
            raise SearchBudgetExceeded(
                f"automorphism search exceeded {budget} expanded nodes (N={n})"
            )

    colors = ref.refine(ref.initial)
    path = []  # (colouring, cell, individualized vertex)
    while True:
        tick()
        cell = _target_cell(colors)
        if cell is None:
            break
        v = int(cell[0])
        path.append((colors, cell, v))
        colors = ref.refine(ref.individualize(colors, v))
    leaf0 = colors
    inv0 = np.argsort(leaf0)
    profiles = [np.bincount(c) for c, _, _ in path] + [np.bincount(leaf0)]

    def explore(c: np.ndarray, depth: int):
        tick()
        if not np.array_equal(np.bincount(c, minlength=len(profiles[depth])), profiles[depth]):
            return None
        cell = _target_cell(c)
        if cell is None:
            gamma = np.empty(n, dtype=int)
            gamma[inv0] = np.argsort(c)
            return gamma if is_automorphism(test, gamma) else None
        for u in cell:
            found = explore(ref.refine(ref.individualize(c, int(u))), depth + 1)
            if found is not None:
                return found
        return None

    uf = _UnionFind(n)
    generators = []
    for level in range(len(path) - 1, -1, -1):
        c, cell, v = path[level]
        for w in cell:
            w = int(w)
            if uf.find(w) == uf.find(v):
                continue
            gamma = explore(ref.refine(ref.individualize(c, w)), level + 1)
            if gamma is None:
                continue
            generators.append(gamma)
            for i in range(n):
                uf.union(i, int(gamma[i]))
    labels = [uf.find(i) for i in range(n)]
    return generators, labels, expanded


def orbital_partition(
    net: ControlledNetwork,
    max_backtrack: int = DEFAULT_MAX_BACKTRACK,
    use_inputs: bool = True,
) -> OrbitalPartition:
    """Orbits of ``aut(G(A, B))`` (or of ``aut(G(A))`` with ``use_inputs=False``).

    Raises
    ------
    SearchBudgetExceeded
        More than ``max_backtrack`` search nodes were expanded.
    """
    gens, labels, _ = _search_generators(net, use_inputs, max_backtrack)
    return OrbitalPartition.from_labels(labels, generators=gens)


class PartitionCheck(NamedTuple):
    ok: bool
    witness: Optional[tuple]
    reason: str

    def __bool__(self):
        return self.ok


def _orbit_labels(n: int, generators) -> list:
    uf = _UnionFind(n)
    for g in generators:
        for i in range(n):
            uf.union(i, int(g[i]))
    return [uf.find(i) for i in range(n)]


def verify_partition(
    net: ControlledNetwork, p: OrbitalPartition, max_backtrack: int = DEFAULT_MAX_BACKTRACK
) -> PartitionCheck:
    """Check that ``p`` is the orbital partition of ``net``.

    Every stored generator must satisfy ``PA = AP`` and ``PB = B`` exactly and
    the orbits they generate must be exactly the clusters.  A partition that
    is not justified by its own generators is compared with a fresh search;
    the witness is then either a transposition that would be needed but is
    not an automorphism (clusters too coarse) or an automorphism that crosses
    two clusters (clusters too fine).
    """
    if p.n_nodes != net.n_nodes:
        return PartitionCheck(False, None, "partition size differs from the network")
    for g in p.generators:
        if not is_automorphism(net, g):
            return PartitionCheck(False, tuple(g), "generator violates PA = AP or PB = B")
    if OrbitalPartition.from_labels(_orbit_labels(net.n_nodes, p.generators)) == p:
        return PartitionCheck(True, None, "clusters are the orbits of the generators")

    gens, labels, _ = _search_generators(net, True, max_backtrack)
    for c in p.clusters:
        for a in c[1:]:
            if labels[a] != labels[c[0]]:
                swap = list(range(net.n_nodes))
                swap[c[0]], swap[a] = a, c[0]
                return PartitionCheck(
                    False,
                    tuple(swap),
                    f"no automorphism maps node {c[0] + 1} to node {a + 1}",
                )
    cof = p.cluster_of
    for g in gens:
        if any(cof[i] != cof[g[i]] for i in range(net.n_nodes)):
            return PartitionCheck(False, tuple(int(v) for v in g), "an automorphism merges two clusters")
    # unreachable when the search is complete
    return PartitionCheck(False, None, "clusters are not the orbits of aut(A, B)")
