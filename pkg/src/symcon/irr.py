"""Orthogonal split of the state space into consensus and transverse parts.

``T_or = [T_par; T_perp]``: the rows of ``T_par`` are normalized cluster
indicators, the rows of ``T_perp`` are, cluster by cluster, a Helmert basis of
the zero-sum vectors supported on that cluster.  In these coordinates

    T_or A T_or^T = blkdiag(A_par, A_perp),   T_or B = [B_par; 0]

whenever the partition is orbital for ``(A, B)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import CorollaryViolation, DimensionError, NotInvariantError
from .netmodel import ControlledNetwork
from .symmetry import OrbitalPartition, indicator_matrix

__all__ = [
    "BlockDecomposition",
    "helmert_basis",
    "build_t_parallel",
    "build_t_perp",
    "build_decomposition",
    "quotient_pair",
    "project_states",
    "controllability_rank",
    "default_tol",
]


def default_tol(A: np.ndarray) -> float:
    return 1e-9 * max(1.0, float(np.max(np.abs(A))) if A.size else 1.0)


def helmert_basis(n: int) -> np.ndarray:
    """Orthonormal basis of the zero-sum subspace of R^n, shape (n-1, n).

    Row ``k`` (0-based) is ``(1, .., 1, -(k+1), 0, .., 0) / sqrt((k+1)(k+2))``.
    """
    H = np.zeros((max(n - 1, 0), n))
    for k in range(1, n):
        H[k - 1, :k] = 1.0
        H[k - 1, k] = -k
        H[k - 1] /= np.sqrt(k * (k + 1.0))
    return H


def _order(p: OrbitalPartition, order: Optional[Sequence[int]]) -> list:
    if order is None:
        return list(range(p.n_clusters))
    order = [int(j) for j in order]
    if sorted(order) != list(range(p.n_clusters)):
        raise DimensionError(f"cluster order must permute 0..{p.n_clusters - 1}, got {order}")
    return order


def build_t_parallel(p: OrbitalPartition, order: Optional[Sequence[int]] = None) -> np.ndarray:
    """Rows ``|C_j|^{-1/2}`` on the nodes of cluster ``j``, zero elsewhere.

    ``order`` permutes the rows (row ``r`` belongs to cluster ``order[r]``);
    the default is the canonical cluster order.
    """
    T = np.zeros((p.n_clusters, p.n_nodes))
    for r, j in enumerate(_order(p, order)):
        c = list(p.clusters[j])
        T[r, c] = 1.0 / np.sqrt(len(c))
    return T


def build_t_perp(p: OrbitalPartition, order: Optional[Sequence[int]] = None):
    """Cluster-specific transverse rows and the cluster tag of every row."""
    rows, tags = [], []
    for j in _order(p, order):
        c = list(p.clusters[j])
        for h in helmert_basis(len(c)):
            r = np.zeros(p.n_nodes)
            r[c] = h
            rows.append(r)
            tags.append(j)
    T = np.array(rows).reshape(len(rows), p.n_nodes)
    return T, tuple(tags)


def controllability_rank(A: np.ndarray, B: np.ndarray, tol: Optional[float] = None) -> int:
    """Rank of the Kalman matrix ``[B, AB, ..., A^(n-1) B]``.

    Columns are normalized block by block before the rank decision so that
    fast-growing powers do not swamp the threshold.
    """
    n = A.shape[0]
    if n == 0 or B.size == 0:
        return 0
    blocks, blk = [], B
    for _ in range(n):
        scale = np.max(np.abs(blk))
        blocks.append(blk / scale if scale > 0 else blk)
        blk = A @ blk
    K = np.hstack(blocks)
    s = np.linalg.svd(K, compute_uv=False)
    if s[0] == 0:
        return 0
    tol = tol if tol is not None else max(K.shape) * np.finfo(float).eps * s[0] * 1e3
    return int(np.sum(s > tol))


@dataclass(frozen=True, eq=False)
class BlockDecomposition:
    t_parallel: np.ndarray
    t_perp: np.ndarray
    perp_row_cluster: tuple
    a_parallel: np.ndarray
    a_perp: np.ndarray
    b_parallel: np.ndarray
    b_perp: np.ndarray
    tol: float
    partition: OrbitalPartition
    cluster_order: tuple

    @property
    def t_or(self) -> np.ndarray:
        return np.vstack([self.t_parallel, self.t_perp])

    @property
    def n_nodes(self) -> int:
        return self.t_parallel.shape[1]

    @property
    def n_clusters(self) -> int:
        return self.t_parallel.shape[0]

    def residuals(self, net: ControlledNetwork) -> dict:
        """Max-norm residuals of the structural invariants."""
        T = self.t_or
        A = net.adjacency
        return {
            "orthogonality": float(np.max(np.abs(T @ T.T - np.eye(T.shape[0])))),
            "cross_par_perp": float(np.max(np.abs(self.t_parallel @ A @ self.t_perp.T), initial=0.0)),
            "cross_perp_par": float(np.max(np.abs(self.t_perp @ A @ self.t_parallel.T), initial=0.0)),
            "b_perp": float(np.max(np.abs(self.b_perp), initial=0.0)),
        }

    def e_pinv_quotient(self, net: ControlledNetwork) -> np.ndarray:
        """Unnormalized quotient ``E^+ A E`` (row-averaged cluster couplings)."""
        E = indicator_matrix(self.partition)[:, list(self.cluster_order)]
        return np.linalg.pinv(E) @ net.adjacency @ E


def build_decomposition(
    net: ControlledNetwork,
    p: OrbitalPartition,
    tol: Optional[float] = None,
    order: Optional[Sequence[int]] = None,
) -> BlockDecomposition:
    """Transform ``(A, B)`` with ``T_or`` and check the block structure.

    Raises
    ------
    NotInvariantError
        ``|T_par A T_perp^T|_max > tol``: ``p`` does not decouple ``A``.
    CorollaryViolation
        ``|T_perp B|_max > tol``: nodes of one cluster receive different inputs.
    """
    if p.n_nodes != net.n_nodes:
        raise DimensionError(f"partition covers {p.n_nodes} nodes, network has {net.n_nodes}")
    tol = default_tol(net.adjacency) if tol is None else float(tol)
    ordr = tuple(_order(p, order))
    Tpar = build_t_parallel(p, ordr)
    Tperp, tags = build_t_perp(p, ordr)
    A, B = net.adjacency, net.input_pattern
    cross = np.max(np.abs(Tpar @ A @ Tperp.T), initial=0.0)
    if cross > tol:
        raise NotInvariantError(
            f"cross block |T_par A T_perp^T|_max = {cross:.3e} exceeds tol {tol:.1e}"
        )
    b_perp = Tperp @ B
    if np.max(np.abs(b_perp), initial=0.0) > tol:
        raise CorollaryViolation(
            f"|B_perp|_max = {np.max(np.abs(b_perp)):.3e} exceeds tol {tol:.1e}"
        )
    a_par = Tpar @ A @ Tpar.T
    a_perp = Tperp @ A @ Tperp.T
    # symmetrize away rounding so downstream eigh sees an exactly symmetric input
    a_par = 0.5 * (a_par + a_par.T)
    a_perp = 0.5 * (a_perp + a_perp.T)
    return BlockDecomposition(
        t_parallel=Tpar,
        t_perp=Tperp,
        perp_row_cluster=tags,
        a_parallel=a_par,
        a_perp=a_perp,
        b_parallel=Tpar @ B,
        b_perp=b_perp,
        tol=tol,
        partition=p,
        cluster_order=ordr,
    )


def quotient_pair(d: BlockDecomposition):
    """``(A_par, B_par, rank)`` with the Kalman rank of the quotient pair."""
    return d.a_parallel, d.b_parallel, controllability_rank(d.a_parallel, d.b_parallel)


def project_states(d: BlockDecomposition, x) -> tuple[np.ndarray, np.ndarray]:
    """``(z_par, z_perp) = (T_par x, T_perp x)``; ``x`` may be (N,) or (N, T)."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] != d.n_nodes:
        raise DimensionError(f"state has leading dimension {x.shape[0]}, expected {d.n_nodes}")
    return d.t_parallel @ x, d.t_perp @ x
