"""Independent oracles and generators shared by the test modules."""

from __future__ import annotations

from itertools import combinations, permutations

import numpy as np
from scipy.linalg import expm

from symcon.netmodel import ControlledNetwork


def planted_network(rng: np.random.Generator, n: int, p_edge: float = 0.4, weighted: bool = False,
                    n_inputs: int = 1) -> tuple:
    """Random network invariant under a random node permutation ``sigma``.

    Edges are drawn at random and closed under ``sigma``; input columns are
    indicators of unions of ``sigma``-orbits.  Returns ``(net, sigma)``.
    """
    sigma = rng.permutation(n)
    A = np.zeros((n, n))
    for i, j in combinations(range(n), 2):
        if A[i, j] or rng.random() >= p_edge:
            continue
        w = float(rng.integers(1, 4)) if weighted else 1.0
        a, b = i, j
        while True:
            A[a, b] = A[b, a] = w
            a, b = sigma[a], sigma[b]
            if (a, b) == (i, j):
                break
    orbits = _cycles(sigma)
    B = np.zeros((n, n_inputs))
    for m in range(n_inputs):
        for c in orbits:
            if rng.random() < 0.4:
                B[list(c), m] = 1.0
    return ControlledNetwork(A, B), sigma


def _cycles(sigma) -> list:
    seen, out = set(), []
    for s in range(len(sigma)):
        if s in seen:
            continue
        c, v = [], s
        while v not in seen:
            seen.add(v)
            c.append(v)
            v = int(sigma[v])
        out.append(tuple(sorted(c)))
    return out


def brute_force_orbits(net: ControlledNetwork) -> list:
    """Orbits of ``aut(A, B)`` by testing every permutation (N <= 8)."""
    A, B = net.adjacency, net.input_pattern
    n = net.n_nodes
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            a = parent[a]
        return a

    for perm in permutations(range(n)):
        g = np.array(perm)
        if np.array_equal(A[np.ix_(g, g)], A) and np.array_equal(B[g], B):
            for i in range(n):
                ra, rb = find(i), find(g[i])
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
    groups: dict = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted((tuple(c) for c in groups.values()), key=lambda c: c[0])


def pbh_rank_oracle(a_perp: np.ndarray, d_perp: np.ndarray) -> bool:
    """Stabilizability via eigenvectors: no non-stable eigenvector is orthogonal to all of ``d_perp``."""
    if a_perp.shape[0] == 0:
        return True
    w, V = np.linalg.eigh(a_perp)
    scale = max(1.0, np.max(np.abs(w)))
    for lam in np.unique(np.round(w[w >= -1e-7 * scale], 6)):
        Vl = V[:, np.abs(w - lam) < 1e-6 * scale]
        P = Vl.T @ d_perp
        if P.size == 0 or np.linalg.matrix_rank(P, tol=1e-8 * max(1.0, np.abs(P).max())) < Vl.shape[1]:
            return False
    return True


def admissible_columns(clusters) -> list:
    return [(k, l) for c in clusters for k, l in combinations(c, 2)]


def min_drivers_exhaustive(d, max_columns: int = 4):
    """Fewest driver nodes over all stabilizing column sets of size ``<= max_columns``."""
    n = d.n_nodes
    cols = admissible_columns(d.partition.clusters)
    best = None
    for r in range(0, max_columns + 1):
        for subset in combinations(cols, r):
            nodes = {v for kl in subset for v in kl}
            if best is not None and len(nodes) >= best:
                continue
            D = np.zeros((n, r))
            for j, (k, l) in enumerate(subset):
                D[k, j], D[l, j] = 1.0, -1.0
            if pbh_rank_oracle(d.a_perp, d.t_perp @ D):
                best = len(nodes)
    return best


def simpson(f, a: float, b: float, panels: int):
    """Composite Simpson rule with ``panels`` (even) subintervals; ``f`` maps a scalar to an array."""
    if panels % 2:
        raise ValueError("panels must be even")
    h = (b - a) / panels
    acc = f(a) + f(b)
    for k in range(1, panels):
        acc = acc + (4 if k % 2 else 2) * f(a + k * h)
    return acc * h / 3.0


def least_norm_energy(A, B, z0, zf, tf, steps=2000):
    """Energy of the least-norm piecewise-constant input, exact discretization."""
    K, M = B.shape
    h = tf / steps
    Ad = expm(A * h)
    # exact zero-order-hold input matrix via the augmented exponential
    aug = np.zeros((K + M, K + M))
    aug[:K, :K], aug[:K, K:] = A, B
    Bd = expm(aug * h)[:K, K:]
    cols, P = [], np.eye(K)
    for _ in range(steps):
        cols.append(P @ Bd)
        P = P @ Ad
    R = np.hstack(cols[::-1])
    target = zf - np.linalg.matrix_power(Ad, steps) @ z0
    u = np.linalg.pinv(R) @ target
    return float(h * u @ u)
