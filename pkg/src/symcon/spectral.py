"""Eigen-analysis of the transverse block ``A_perp``.

Eigenvalues are grouped by multiplicity.  For each group the eigenspace
``Omega_i`` is lifted to node coordinates and split into cluster-specific
parts ``Omega_i^j`` (vectors supported on cluster ``j`` only) plus the
intertwined residual that no cluster-specific vector reaches.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.linalg import null_space

from .irr import BlockDecomposition

__all__ = [
    "EigenGroup",
    "TransverseSpectrum",
    "transverse_spectrum",
    "cluster_split",
    "group_eigenvalues",
    "principal_cosines",
    "same_subspace",
    "COSINE_TOL",
]

COSINE_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class EigenGroup:
    lam: float
    mu: int
    perp_basis: np.ndarray  # (N-K, mu), transverse coordinates
    omega_basis: np.ndarray  # (N, mu), node coordinates
    cluster_parts: dict = field(default_factory=dict)  # cluster -> (N, d)
    residual_basis: Optional[np.ndarray] = None

    def cluster_dims(self, n_clusters: int) -> list:
        return [self.cluster_parts.get(j, np.zeros((0, 0))).shape[1] for j in range(n_clusters)]

    @property
    def residual_dim(self) -> int:
        return 0 if self.residual_basis is None else self.residual_basis.shape[1]

    def support_clusters(self, clusters, tol: float = 1e-9) -> list:
        """Clusters on which some vector of ``Omega_i`` is nonzero."""
        return [
            j for j, c in enumerate(clusters)
            if np.linalg.norm(self.omega_basis[list(c)], ord=2) > tol
        ]


@dataclass(frozen=True, eq=False)
class TransverseSpectrum:
    groups: tuple
    lambda_perp: tuple  # indices into groups, the non-stable set
    group_tol: float
    clusters: tuple
    n_nodes: int

    @property
    def non_stable(self) -> list:
        return [self.groups[i] for i in self.lambda_perp]

    @property
    def eigenvalues(self) -> np.ndarray:
        """All transverse eigenvalues, repeated by multiplicity, ascending."""
        return np.repeat([g.lam for g in self.groups], [g.mu for g in self.groups])

    def stable_basis(self) -> np.ndarray:
        """Transverse-coordinate eigenvectors of the groups outside the non-stable set."""
        cols = [g.perp_basis for i, g in enumerate(self.groups) if i not in self.lambda_perp]
        n = sum(g.mu for g in self.groups)
        return np.hstack(cols) if cols else np.zeros((n, 0))

    def report(self) -> dict:
        K = len(self.clusters)
        return {
            "group_tol": self.group_tol,
            "groups": [
                {
                    "lambda": g.lam,
                    "mu": g.mu,
                    "cluster_dims": g.cluster_dims(K),
                    "residual_dim": g.residual_dim,
                    "non_stable": i in self.lambda_perp,
                }
                for i, g in enumerate(self.groups)
            ],
            "lambda_perp": [self.groups[i].lam for i in self.lambda_perp],
            "sum_mu_lambda_perp": int(sum(self.groups[i].mu for i in self.lambda_perp)),
        }


def group_eigenvalues(w: np.ndarray, group_tol: float) -> list:
    """Split sorted eigenvalues into runs whose consecutive gaps are ``<= group_tol``."""
    if w.size == 0:
        return []
    runs, start = [], 0
    for k in range(1, w.size):
        if w[k] - w[k - 1] > group_tol:
            runs.append(slice(start, k))
            start = k
    runs.append(slice(start, w.size))
    return runs


def principal_cosines(U: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Cosines of the principal angles between two orthonormal bases."""
    if U.shape[1] == 0 or V.shape[1] == 0:
        return np.zeros(0)
    return np.clip(np.linalg.svd(U.T @ V, compute_uv=False), 0.0, 1.0)


def same_subspace(U: np.ndarray, V: np.ndarray, tol: float = COSINE_TOL) -> bool:
    if U.shape[1] != V.shape[1]:
        return False
    c = principal_cosines(U, V)
    return bool(np.all(c >= 1.0 - tol))


def cluster_split(group: EigenGroup, clusters, cos_tol: float = COSINE_TOL) -> EigenGroup:
    """Split ``Omega_i`` into cluster-specific parts and the intertwined residual.

    ``Omega_i^j`` is the intersection of ``Omega_i`` with the coordinate
    subspace of cluster ``j``: the singular values of the cluster rows of the
    orthonormal basis are the cosines of the principal angles, and the right
    singular vectors with cosine ``>= 1 - cos_tol`` span the intersection.
    The residual is the orthogonal complement of all parts within ``Omega_i``.
    """
    U = group.omega_basis
    n, mu = U.shape
    parts = {}
    # cos >= 1 - cos_tol  <=>  sin <= sin_tol; the sines are the singular
    # values of the off-cluster rows, which resolve near-intersections to eps
    sin_tol = np.sqrt(1.0 - (1.0 - cos_tol) ** 2)
    for j, c in enumerate(clusters):
        rows = list(c)
        if mu == 0:
            continue
        off = np.setdiff1d(np.arange(n), rows)
        _, s, Vt = np.linalg.svd(U[off], full_matrices=True)
        s = np.concatenate([s, np.zeros(mu - s.size)])
        k = int(np.sum(s <= sin_tol))
        if k:
            # orthonormalize on the cluster rows only, so the support is exact
            Qc, _ = np.linalg.qr(U[rows] @ Vt[mu - k:].T)
            Q = np.zeros((n, k))
            Q[rows] = Qc
            parts[j] = Q
    if parts:
        P = np.hstack(list(parts.values()))
        coeff = null_space((U.T @ P).T)
        residual = U @ coeff
    else:
        residual = U.copy()
    return replace(group, cluster_parts=parts, residual_basis=residual)


def transverse_spectrum(
    d: BlockDecomposition,
    group_tol: Optional[float] = None,
    cos_tol: float = COSINE_TOL,
) -> TransverseSpectrum:
    """Grouped eigen-decomposition of ``A_perp`` with cluster splits.

    Eigenvalues closer than ``group_tol`` (default ``1e-6 max(1, |A_perp|_2)``)
    are merged; the non-stable set keeps every group with ``lam >= -group_tol``.
    """
    Ap = d.a_perp
    n_perp = Ap.shape[0]
    clusters = tuple(d.partition.clusters)
    if group_tol is None:
        scale = np.linalg.norm(Ap, 2) if n_perp else 0.0
        group_tol = 1e-6 * max(1.0, scale)
    if n_perp == 0:
        return TransverseSpectrum((), (), group_tol, clusters, d.n_nodes)
    w, V = np.linalg.eigh(Ap)
    groups = []
    for run in group_eigenvalues(w, group_tol):
        Vi, _ = np.linalg.qr(V[:, run])
        g = EigenGroup(
            lam=float(np.mean(w[run])),
            mu=Vi.shape[1],
            perp_basis=Vi,
            omega_basis=d.t_perp.T @ Vi,
        )
        groups.append(cluster_split(g, clusters, cos_tol))
    lam_perp = tuple(i for i, g in enumerate(groups) if g.lam >= -group_tol)
    return TransverseSpectrum(tuple(groups), lam_perp, group_tol, clusters, d.n_nodes)
