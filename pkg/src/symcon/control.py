"""Minimum-energy consensus input and stabilizing transverse feedback.

The consensus input steers the quotient state ``z_par = T_par x`` from
``z_par(0)`` to ``z_par(t_f)`` with least energy::

    u(t) = B_par^T exp(A_par^T (t_f - t)) W^{-1} (z_f - exp(A_par t_f) z_0)

where ``W`` is the reachability Gramian on ``[0, t_f]``.  Because ``A_par``
is symmetric, ``u`` is a finite sum of exponentials and is stored as
coefficients and rates instead of samples.

The transverse feedback ``w = -G z_perp`` moves every non-stable eigenvalue of
``A_perp`` to a chosen negative target while leaving the stable eigenpairs
untouched (``G V_stable = 0``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np
from scipy.linalg import solve_sylvester

from .errors import DimensionError, PlacementFailed, SingularGramian
from .spectral import TransverseSpectrum, group_eigenvalues

__all__ = [
    "gramian",
    "ModalInput",
    "min_energy_input",
    "PlacementResult",
    "place_poles",
    "ControlPlan",
    "GRAMIAN_RTOL",
    "PLACEMENT_TOL",
]

GRAMIAN_RTOL = 1e-12
PLACEMENT_TOL = 1e-6
_RATE_TOL = 1e-9


def _exp_integral(rate: np.ndarray, T: float) -> np.ndarray:
    """``int_0^T exp(rate s) ds`` elementwise, with the ``rate -> 0`` limit."""
    rate = np.asarray(rate, dtype=float)
    small = np.abs(rate) < 1e-12
    safe = np.where(small, 1.0, rate)
    return np.where(small, T, np.expm1(safe * T) / safe)


def _modal_gramian(a_par, b_par, t0: float, tf: float):
    """Eigenpairs of ``A_par`` and the Gramian in that eigenbasis, checked for rank.

    Singularity is judged on the Jacobi-scaled modal Gramian
    ``S^-1/2 Wm S^-1/2`` (``S = diag Wm``), which is invariant to the
    ``exp(2 lam t_f)`` growth of unstable modes and so measures
    controllability rather than scale.
    """
    A = np.atleast_2d(np.asarray(a_par, dtype=float))
    B = np.asarray(b_par, dtype=float).reshape(A.shape[0], -1)
    if tf <= t0:
        raise DimensionError(f"horizon must satisfy tf > t0, got [{t0}, {tf}]")
    lam, V = np.linalg.eigh(0.5 * (A + A.T))
    M = V.T @ B @ B.T @ V
    Wm = M * _exp_integral(lam[:, None] + lam[None, :], tf - t0)
    Wm = 0.5 * (Wm + Wm.T)
    diag = np.diag(Wm).copy()
    if np.any(diag <= 0):
        raise SingularGramian(
            f"mode(s) with eigenvalue {lam[diag <= 0]} receive no input; "
            "the quotient pair is not controllable"
        )
    sc = 1.0 / np.sqrt(diag)
    Ws = Wm * np.outer(sc, sc)
    ew = np.linalg.eigvalsh(Ws)
    if ew[0] < GRAMIAN_RTOL * ew[-1]:
        raise SingularGramian(
            f"scaled Gramian eigenvalues span [{ew[0]:.3e}, {ew[-1]:.3e}]; "
            "the quotient pair is not controllable on this horizon"
        )
    return lam, V, Wm, Ws, sc


def gramian(a_par, b_par, t0: float, tf: float) -> np.ndarray:
    """Reachability Gramian ``int_t0^tf e^{A s} B B^T e^{A^T s} ds`` in closed form.

    Raises
    ------
    SingularGramian
        The Jacobi-scaled Gramian has an eigenvalue below ``1e-12`` of its
        largest (uncontrollable pair or degenerate horizon).
    """
    _, V, Wm, _, _ = _modal_gramian(a_par, b_par, t0, tf)
    W = V @ Wm @ V.T
    return 0.5 * (W + W.T)


@dataclass(frozen=True, eq=False)
class ModalInput:
    """``u_m(t) = sum_r coefficients[m, r] * exp(rates[r] * (tf - t))``."""

    coefficients: np.ndarray  # (M, R)
    rates: np.ndarray  # (R,)
    tf: float

    def __call__(self, t) -> np.ndarray:
        """Input at time(s) ``t``; shape (M,) for scalar ``t``, else (len(t), M)."""
        t = np.asarray(t, dtype=float)
        E = np.exp(np.multiply.outer(self.tf - t, self.rates))
        return E @ self.coefficients.T

    @property
    def n_inputs(self) -> int:
        return self.coefficients.shape[0]

    def modes(self) -> list:
        return [
            {"rate": float(r), "coefficients": [float(c) for c in self.coefficients[:, k]]}
            for k, r in enumerate(self.rates)
        ]

    def energy(self, t0: float = 0.0) -> float:
        """``int_t0^tf |u(t)|^2 dt`` in closed form."""
        C = self.coefficients.T @ self.coefficients
        R = self.rates[:, None] + self.rates[None, :]
        return float(np.sum(C * _exp_integral(R, self.tf - t0)))

    @classmethod
    def from_modes(cls, modes, tf: float) -> "ModalInput":
        rates = np.array([m["rate"] for m in modes], dtype=float)
        coef = np.array([m["coefficients"] for m in modes], dtype=float).T
        return cls(coef.reshape(-1, rates.size), rates, float(tf))


def min_energy_input(a_par, b_par, x0_par, xf_par, tf: float) -> ModalInput:
    """Least-energy input transferring ``x0_par`` to ``xf_par`` on ``[0, tf]``.

    Modes are grouped by distinct eigenvalue of ``a_par``; the rate of a mode
    is its eigenvalue and time enters as ``exp(rate (tf - t))``.
    """
    A = np.atleast_2d(np.asarray(a_par, dtype=float))
    K = A.shape[0]
    B = np.asarray(b_par, dtype=float).reshape(K, -1)
    x0 = np.asarray(x0_par, dtype=float).reshape(K)
    xf = np.asarray(xf_par, dtype=float).reshape(K)
    lam, V, _, Ws, sc = _modal_gramian(A, B, 0.0, tf)
    drift = V @ (np.exp(lam * tf) * (V.T @ x0))
    # W^-1 applied in the scaled eigenbasis, where it is well conditioned;
    # eta stays modal because unstable-mode components can sit far below
    # the rounding level of node coordinates
    eta = sc * np.linalg.solve(Ws, sc * (V.T @ (xf - drift)))
    Bm = V.T @ B
    rates, cols = [], []
    for run in group_eigenvalues(lam, _RATE_TOL * max(1.0, np.max(np.abs(lam)))):
        rates.append(float(np.mean(lam[run])))
        cols.append(Bm[run].T @ eta[run])
    return ModalInput(np.column_stack(cols), np.array(rates), float(tf))


@dataclass(frozen=True, eq=False)
class PlacementResult:
    """Gain and its spectral certificate.

    ``schur_basis`` (orthogonal) and ``schur_form`` (upper triangular) satisfy
    ``(A_perp - D_perp G) U = U S`` up to ``schur_residual`` (relative); the
    diagonal of ``S`` is the certified closed-loop spectrum.  ``eigenvalues``
    are the computed eigenvalues of the closed-loop matrix, which scatter
    around defective targets by roughly ``eps ** (1 / chain length)``.
    """

    gain: np.ndarray
    certified_spectrum: np.ndarray
    schur_basis: np.ndarray
    schur_form: np.ndarray
    schur_residual: float
    eigenvalues: np.ndarray
    chain_sizes: dict  # target -> Jordan chain sizes used

    @property
    def closed_loop_scatter(self) -> float:
        """Largest distance of a computed eigenvalue from the nearest certified one."""
        cert = self.certified_spectrum
        return float(max(np.min(np.abs(cert - e)) for e in self.eigenvalues)) if cert.size else 0.0


def _controllability_indices(A: np.ndarray, B: np.ndarray) -> list:
    """Brunovsky indices of ``(A, B)``, descending."""
    n = A.shape[0]
    basis = np.zeros((n, 0))
    new_per_power, blk = [], B
    while basis.shape[1] < n and len(new_per_power) < n:
        cand = blk / np.maximum(np.linalg.norm(blk, axis=0), 1e-300)
        M = np.hstack([basis, cand])
        U, sv, _ = np.linalg.svd(M, full_matrices=False)
        r = int(np.sum(sv > 1e-9 * sv[0]))
        if r == basis.shape[1]:
            break
        new_per_power.append(r - basis.shape[1])
        basis = U[:, :r]
        blk = A @ blk
    if basis.shape[1] < n:
        raise PlacementFailed("the non-stable transverse modes are not controllable from D")
    return sorted(
        (sum(1 for c in new_per_power if c > k) for k in range(max(new_per_power))),
        reverse=True,
    )


def _chain_sizes(count: int, kappa: list, single_target: bool) -> list:
    """Jordan chain sizes for ``count`` equal poles.

    A closed loop with one pole value needs chains that dominate the
    controllability indices, and the indices themselves are the least
    defective choice.  Otherwise chains are balanced over at most
    ``len(kappa)`` blocks.
    """
    if single_target:
        return list(kappa)
    c = min(count, len(kappa))
    return [count // c + (1 if k < count % c else 0) for k in range(c)]


def _jordan(targets_sorted: list, sizes_by_target: dict, scale: float) -> np.ndarray:
    n = sum(sum(v) for v in sizes_by_target.values())
    H = np.zeros((n, n))
    o = 0
    for t in targets_sorted:
        for m in sizes_by_target[t]:
            H[o:o + m, o:o + m] = t * np.eye(m) + scale * np.eye(m, k=1)
            o += m
    return H


def place_poles(
    a_perp,
    d_perp,
    targets: Union[float, Mapping[int, float]],
    s: TransverseSpectrum,
    full_output: bool = False,
    seeds: int = 16,
    scales=(1.0, 10.0, 100.0),
    tol: float = PLACEMENT_TOL,
):
    """Feedback ``G`` placing every non-stable group of ``A_perp`` at its target.

    ``targets`` is one negative number for all groups or a map from group
    index (into ``s.groups``) to target.  The gain is restricted to the
    non-stable eigenspace, ``G = F V_u^T``, so stable eigenpairs are kept.
    ``F`` solves the eigenstructure problem
    ``(Lambda_u - V_u^T D_perp F) X = X H`` through the Sylvester equation
    ``Lambda_u X - X H = V_u^T D_perp F_hat``, ``F = F_hat X^{-1}``, with
    ``H`` block-Jordan at the targets.  Equal targets get balanced Jordan
    chains, at most one chain per input column; with a single target the
    chains follow the controllability indices, the least defective
    structure the inputs can realize.  Seeded choices of ``F_hat`` and chain
    scale are tried and the one with the smallest eigenvalue scatter kept.

    Returns ``G`` (W x (N-K)), or a :class:`PlacementResult` with
    ``full_output=True``.

    Raises
    ------
    PlacementFailed
        A target is not negative, the inputs cannot reach a non-stable mode,
        or no candidate yields a Schur certificate within ``tol``.
    """
    A = np.asarray(a_perp, dtype=float)
    n = A.shape[0]
    Dp = np.asarray(d_perp, dtype=float).reshape(n, -1)
    Wc = Dp.shape[1]
    groups = s.non_stable
    if isinstance(targets, Mapping):
        tmap = {i: float(targets[i]) for i in s.lambda_perp if i in targets}
        missing = [i for i in s.lambda_perp if i not in tmap]
        if missing:
            raise PlacementFailed(f"no target given for groups {missing}")
    else:
        tmap = {i: float(targets) for i in s.lambda_perp}
    if any(t >= 0 for t in tmap.values()):
        raise PlacementFailed(f"targets must be negative, got {sorted(set(tmap.values()))}")

    stable = [i for i in range(len(s.groups)) if i not in s.lambda_perp]
    Vs = np.hstack([s.groups[i].perp_basis for i in stable]) if stable else np.zeros((n, 0))
    lam_s = np.repeat([s.groups[i].lam for i in stable], [s.groups[i].mu for i in stable])
    if not groups:
        G = np.zeros((Wc, n))
        ev = np.linalg.eigvals(A)
        res = PlacementResult(G, lam_s, Vs, np.diag(lam_s), 0.0, ev, {})
        return res if full_output else G

    Vu = np.hstack([g.perp_basis for g in groups])
    Au = Vu.T @ A @ Vu
    Au = 0.5 * (Au + Au.T)
    Dc = Vu.T @ Dp
    nu = Au.shape[0]
    kappa = _controllability_indices(Au, Dc)

    counts: dict = {}
    for i in s.lambda_perp:
        counts[tmap[i]] = counts.get(tmap[i], 0) + s.groups[i].mu
    tsorted = sorted(counts)
    sizes = {t: _chain_sizes(counts[t], kappa, len(tsorted) == 1) for t in tsorted}
    if any(len(v) > Wc for v in sizes.values()) or Wc == 0:
        raise PlacementFailed("not enough input columns for the requested pole multiplicities")

    scale_a = max(1.0, np.linalg.norm(A, 2))
    best = None
    for sc in scales:
        H = _jordan(tsorted, sizes, sc)
        for seed in range(seeds):
            Fh = np.random.default_rng(seed).standard_normal((Wc, nu))
            X = solve_sylvester(Au, -H, Dc @ Fh)
            if not np.all(np.isfinite(X)) or np.linalg.cond(X) > 1e12:
                continue
            F = np.linalg.solve(X.T, Fh.T).T
            G = F @ Vu.T
            Acl = A - Dp @ G
            ev = np.linalg.eigvals(Acl)
            cert = np.concatenate([lam_s, np.diag(H)])
            scatter = max(np.min(np.abs(cert - e)) for e in ev)
            if best is None or scatter < best[0]:
                best = (scatter, G, F, X, H, ev)
    if best is None:
        raise PlacementFailed("every Sylvester candidate was singular")
    _, G, F, X, H, ev = best

    # Schur certificate: X = Q R  =>  Lambda_u - Dc F = Q (R H R^-1) Q^T
    Q, R = np.linalg.qr(X)
    Su = np.linalg.solve(R.T, (R @ H).T).T
    Su = np.triu(Su)
    Su[np.diag_indices(nu)] = np.diag(H)
    U = np.hstack([Vs, Vu @ Q])
    top = np.hstack([np.diag(lam_s), -Vs.T @ Dp @ F @ Q])
    bottom = np.hstack([np.zeros((nu, Vs.shape[1])), Su])
    S = np.vstack([top, bottom])
    Acl = A - Dp @ G
    residual = float(np.linalg.norm(Acl @ U - U @ S, 2) / max(scale_a, np.linalg.norm(Acl, 2)))
    if residual > tol:
        raise PlacementFailed(
            f"closed-loop Schur residual {residual:.3e} exceeds {tol:.1e}; "
            f"computed spectrum {np.sort_complex(ev)}"
        )
    cert = np.diag(S).copy()
    result = PlacementResult(G, cert, U, S, residual, ev, sizes)
    return result if full_output else G


@dataclass(frozen=True, eq=False)
class ControlPlan:
    """Everything needed to run the closed loop.

    ``clusters`` are 0-based; ``d_matrix`` is N x W, ``gain`` is W x (N-K)
    and acts on ``z_perp = T_perp x`` with ``T_perp`` rebuilt from the
    clusters in canonical order.
    """

    clusters: tuple
    d_matrix: np.ndarray
    gain: np.ndarray
    u: ModalInput
    tf: float
    x0: np.ndarray
    target_parallel: np.ndarray
    gramian: np.ndarray
    closed_loop_spectrum: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def n_nodes(self) -> int:
        return self.d_matrix.shape[0]

    def to_json_dict(self) -> dict:
        return {
            "clusters": [[i + 1 for i in c] for c in self.clusters],
            "tf": self.tf,
            "x0": self.x0.tolist(),
            "target_parallel": self.target_parallel.tolist(),
            "u_modes": self.u.modes(),
            "d_matrix": self.d_matrix.tolist(),
            "gain": self.gain.tolist(),
            "gramian": self.gramian.tolist(),
            "closed_loop_spectrum": np.real(self.closed_loop_spectrum).tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json_dict(cls, d: dict) -> "ControlPlan":
        tf = float(d["tf"])
        return cls(
            clusters=tuple(tuple(i - 1 for i in c) for c in d["clusters"]),
            d_matrix=np.array(d["d_matrix"], dtype=float).reshape(len(d["x0"]), -1),
            gain=np.array(d["gain"], dtype=float).reshape(-1, len(d["x0"]) - len(d["clusters"])),
            u=ModalInput.from_modes(d["u_modes"], tf),
            tf=tf,
            x0=np.array(d["x0"], dtype=float),
            target_parallel=np.array(d["target_parallel"], dtype=float),
            gramian=np.array(d["gramian"], dtype=float),
            closed_loop_spectrum=np.array(d.get("closed_loop_spectrum", []), dtype=float),
        )

    @classmethod
    def from_json(cls, text: str) -> "ControlPlan":
        return cls.from_json_dict(json.loads(text))
