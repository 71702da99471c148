"""Driver-node selection for stabilizing the group consensus subspace.

Extra inputs ``D w`` are restricted to columns ``e_k - e_l`` with ``k`` and
``l`` in the same cluster.  Such columns sum to zero on every cluster, so
``T_par D = 0`` and the stabilizing action never disturbs the consensus
dynamics.  Columns are added until, for every non-stable eigenvalue group,
the projections of the columns on ``Omega_i`` span ``Omega_i`` (the PBH
condition for ``(A_perp, D_perp)``).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple, Optional

import numpy as np

from .errors import SelectionFailed
from .spectral import TransverseSpectrum, group_eigenvalues

__all__ = [
    "DriverBounds",
    "DriverSelection",
    "select_drivers",
    "reduce_inputs",
    "bounds",
    "pbh_check",
    "PBHReport",
    "projection_rank",
    "RANK_RTOL",
]

RANK_RTOL = 1e-8
_RANK_ATOL = 1e-10


def _rank(M: np.ndarray) -> int:
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > max(RANK_RTOL * s[0], _RANK_ATOL)))


def projection_rank(omega_basis: np.ndarray, D: np.ndarray) -> int:
    """Rank of the projection matrix ``Omega_i^T D`` (mu_i x W)."""
    if D.shape[1] == 0:
        return 0
    return _rank(omega_basis.T @ D)


class DriverBounds(NamedTuple):
    min_inputs: int
    min_drivers_global: int
    min_drivers_clustered: int


def _size_or_minus_one(d: int) -> int:
    return d if d > 0 else -1


def bounds(s: TransverseSpectrum) -> DriverBounds:
    """Lower bounds on the number of extra inputs and driver nodes.

    ``min_inputs = max mu_i``; ``min_drivers_global = max |Omega_i|_0 + 1``;
    ``min_drivers_clustered = sum_j (max_i |Omega_i^j|_0 + 1)``, where
    ``|.|_0`` maps an empty subspace to -1 and all maxima run over the
    non-stable groups.
    """
    groups = s.non_stable
    if not groups:
        return DriverBounds(0, 0, 0)
    K = len(s.clusters)
    min_inputs = max(g.mu for g in groups)
    glob = max(_size_or_minus_one(g.mu) for g in groups) + 1
    clustered = sum(
        max(_size_or_minus_one(g.cluster_dims(K)[j]) for g in groups) + 1 for j in range(K)
    )
    return DriverBounds(min_inputs, glob, clustered)


@dataclass(frozen=True, eq=False)
class DriverSelection:
    d_matrix: np.ndarray  # (N, W)
    per_group_rank: dict  # group index -> rank of Omega_i^T D
    bounds: DriverBounds

    @property
    def n_columns(self) -> int:
        return self.d_matrix.shape[1]

    @property
    def driver_nodes(self) -> tuple:
        return tuple(int(i) for i in np.flatnonzero(np.any(self.d_matrix != 0, axis=1)))

    def to_json_dict(self) -> dict:
        return {
            "n_columns": self.n_columns,
            "driver_nodes": [i + 1 for i in self.driver_nodes],
            "bounds": self.bounds._asdict(),
            "per_group_rank": {str(k): v for k, v in self.per_group_rank.items()},
        }


def _column(n: int, k: int, l: int) -> np.ndarray:
    v = np.zeros(n)
    v[k], v[l] = 1.0, -1.0
    return v


class _Selector:
    """Greedy column builder; columns are kept as ``(k, l)`` node pairs."""

    def __init__(self, s: TransverseSpectrum):
        self.s = s
        self.n = s.n_nodes
        self.pairs: list = []
        self.cluster_of = np.empty(self.n, dtype=int)
        for j, c in enumerate(s.clusters):
            self.cluster_of[list(c)] = j

    def matrix(self, pairs=None) -> np.ndarray:
        pairs = self.pairs if pairs is None else pairs
        D = np.zeros((self.n, len(pairs)))
        for col, (k, l) in enumerate(pairs):
            D[k, col], D[l, col] = 1.0, -1.0
        return D

    def drivers(self, pairs=None) -> set:
        pairs = self.pairs if pairs is None else pairs
        return {v for kl in pairs for v in kl}

    def rank(self, g, pairs=None) -> int:
        return projection_rank(g.omega_basis, self.matrix(pairs))

    def _keeps(self, pairs, done) -> bool:
        return all(self.rank(g, pairs) == g.mu for g in done)

    def extend(self, g, done) -> None:
        """Add or rewire one column so that the rank on ``g`` grows by one."""
        current = self.rank(g)
        touched = g.support_clusters(self.s.clusters)
        used = self.drivers()

        def gains(pairs):
            return self.rank(g, pairs) > current

        # 1. a new column between nodes that are already drivers
        for j in touched:
            nodes = sorted(v for v in used if self.cluster_of[v] == j)
            for k, l in combinations(nodes, 2):
                if (k, l) in self.pairs or (l, k) in self.pairs:
                    continue
                if gains(self.pairs + [(k, l)]):
                    self.pairs.append((k, l))
                    return
        # 2. rewire one endpoint of an existing column to a fresh node, without
        #    adding a driver and without breaking an already-handled group
        for j in touched:
            fresh = [v for v in self.s.clusters[j] if v not in used]
            for idx, (k, l) in enumerate(self.pairs):
                if self.cluster_of[k] != j:
                    continue
                others = self.drivers(self.pairs[:idx] + self.pairs[idx + 1:])
                if l in others:
                    continue
                for v in fresh:
                    trial = list(self.pairs)
                    trial[idx] = (k, v)
                    if gains(trial) and self._keeps(trial, done):
                        self.pairs = trial
                        return
        # 3. a new column from the cluster anchor to the first fresh node
        for j in touched:
            members = self.s.clusters[j]
            anchors = sorted(v for v in used if self.cluster_of[v] == j) or [members[0]]
            k = anchors[0]
            for l in members:
                if l == k or l in used:
                    continue
                if gains(self.pairs + [(k, l)]):
                    self.pairs.append((k, l))
                    return
        # 4. anything admissible
        for j in touched:
            for k, l in combinations(self.s.clusters[j], 2):
                if gains(self.pairs + [(k, l)]):
                    self.pairs.append((k, l))
                    return
        raise SelectionFailed(
            f"no admissible column raises the rank on the group lambda = {g.lam:.6g}"
        )


def _per_group_rank(s: TransverseSpectrum, D: np.ndarray) -> dict:
    return {i: projection_rank(s.groups[i].omega_basis, D) for i in s.lambda_perp}


def select_drivers(s: TransverseSpectrum) -> DriverSelection:
    """Greedy driver selection over the non-stable groups, largest eigenvalue first.

    For each group the columns already chosen are counted by the rank of
    their projections on ``Omega_i``; missing directions are supplied, in
    order of preference, by a column between existing drivers, by rewiring
    an existing column to a fresh node of its cluster (kept only if every
    group handled before stays full rank), or by a new column from the
    cluster's first driver to the next fresh node.  Candidate order is
    lexicographic, so the result is deterministic.

    Raises
    ------
    SelectionFailed
        No candidate column raises the rank for some group.
    """
    sel = _Selector(s)
    order = sorted(s.lambda_perp, key=lambda i: -s.groups[i].lam)
    done = []
    for i in order:
        g = s.groups[i]
        while sel.rank(g) < g.mu:
            sel.extend(g, done)
        done.append(g)
        if not sel._keeps(sel.pairs, done):
            raise SelectionFailed(f"selection lost rank on a handled group at lambda = {g.lam:.6g}")
    D = sel.matrix()
    return DriverSelection(D, _per_group_rank(s, D), bounds(s))


def _column_clusters(col: np.ndarray, cluster_of: np.ndarray) -> set:
    return set(cluster_of[np.flatnonzero(col)].tolist())


def reduce_inputs(sel: DriverSelection, s: TransverseSpectrum) -> DriverSelection:
    """Merge columns acting on disjoint clusters while every group stays full rank.

    Pairs ``(a, b)``, ``a < b``, are tried in lexicographic order; column
    ``b`` is added into column ``a`` and dropped when the merged matrix still
    passes the rank test for every non-stable group.
    """
    D = sel.d_matrix.copy()
    cluster_of = np.empty(s.n_nodes, dtype=int)
    for j, c in enumerate(s.clusters):
        cluster_of[list(c)] = j
    groups = s.non_stable

    def ok(M):
        return all(projection_rank(g.omega_basis, M) == g.mu for g in groups)

    merged = True
    while merged:
        merged = False
        W = D.shape[1]
        for a in range(W):
            for b in range(a + 1, W):
                if _column_clusters(D[:, a], cluster_of) & _column_clusters(D[:, b], cluster_of):
                    continue
                trial = np.delete(D, b, axis=1)
                trial[:, a] = D[:, a] + D[:, b]
                if ok(trial):
                    D = trial
                    merged = True
                    break
            if merged:
                break
    return DriverSelection(D, _per_group_rank(s, D), sel.bounds)


class PBHReport(NamedTuple):
    ok: bool
    eigenvalues: tuple  # (lambda, multiplicity, rank of [lambda I - A, D], passed)


def pbh_check(a_perp: np.ndarray, d_perp: np.ndarray, group_tol: float = 1e-6) -> PBHReport:
    """Stabilizability of ``(A_perp, D_perp)`` by the PBH rank test.

    For every eigenvalue with ``lam >= -group_tol`` the rank of
    ``[lam I - A_perp, D_perp]`` must equal the state dimension.
    """
    n = a_perp.shape[0]
    if n == 0:
        return PBHReport(True, ())
    d_perp = np.asarray(d_perp, dtype=float).reshape(n, -1)
    w = np.linalg.eigvalsh(a_perp)
    rows = []
    for run in group_eigenvalues(w, group_tol):
        lam = float(np.mean(w[run]))
        if lam < -group_tol:
            continue
        M = np.hstack([lam * np.eye(n) - a_perp, d_perp])
        sv = np.linalg.svd(M, compute_uv=False)
        # singular values of lam I - A_perp on the eigenspace are O(group_tol)
        r = int(np.sum(sv > max(RANK_RTOL * sv[0], 10 * group_tol)))
        rows.append((lam, run.stop - run.start, r, r == n))
    return PBHReport(all(r[3] for r in rows), tuple(rows))
