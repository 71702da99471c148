"""Closed-loop simulation of ``xdot = A x + B u(t) + D w`` with ``w = -G T_perp x``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .control import ControlPlan
from .errors import DimensionError, NonFiniteState
from .irr import build_t_perp
from .netmodel import ControlledNetwork, Trajectory
from .symmetry import OrbitalPartition

__all__ = ["SimConfig", "simulate", "rk4", "consensus_error", "ConsensusError"]


@dataclass(frozen=True)
class SimConfig:
    """Fixed-step settings; the step is shrunk to ``tf / ceil(tf / dt)`` so ``tf`` is hit exactly."""

    dt: float = 1e-3
    tf: float = 5.0
    x0: Optional[np.ndarray] = None
    record_stride: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise DimensionError(f"dt must be positive, got {self.dt}")
        if not self.tf >= self.dt:
            raise DimensionError(f"tf must be at least dt, got tf={self.tf}, dt={self.dt}")
        if int(self.record_stride) < 1:
            raise DimensionError(f"record_stride must be >= 1, got {self.record_stride}")

    @property
    def n_steps(self) -> int:
        # tolerate tf/dt landing a hair above an integer
        return max(1, math.ceil(self.tf / self.dt - 1e-9))


def rk4(f, x0: np.ndarray, tf: float, n_steps: int, stride: int = 1):
    """Classic fourth-order Runge-Kutta on ``[0, tf]`` with ``n_steps`` equal steps.

    Returns ``(times, states)`` sampled every ``stride`` steps; ``t = 0`` and
    ``t = tf`` are always included.

    Raises
    ------
    NonFiniteState
        A state component becomes NaN or infinite.
    """
    h = tf / n_steps
    x = np.array(x0, dtype=float)
    times, states = [0.0], [x.copy()]
    for k in range(n_steps):
        t = k * h
        k1 = f(t, x)
        k2 = f(t + 0.5 * h, x + 0.5 * h * k1)
        k3 = f(t + 0.5 * h, x + 0.5 * h * k2)
        k4 = f(t + h, x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise NonFiniteState(f"state is not finite at t = {t + h:.6g}")
        if (k + 1) % stride == 0 or k + 1 == n_steps:
            times.append(tf if k + 1 == n_steps else (k + 1) * h)
            states.append(x.copy())
    return np.array(times), np.array(states)


def simulate(net: ControlledNetwork, plan: ControlPlan, cfg: SimConfig) -> Trajectory:
    """Integrate the closed loop and record states and both inputs.

    ``cfg.x0`` overrides ``plan.x0`` when given.  The consensus input is
    evaluated from its modal expansion at every stage time.
    """
    N = net.n_nodes
    if plan.n_nodes != N:
        raise DimensionError(f"plan is for {plan.n_nodes} nodes, network has {N}")
    p = OrbitalPartition(plan.clusters, N)
    Tp, _ = build_t_perp(p)
    A, B, D = net.adjacency, net.input_pattern, plan.d_matrix
    if plan.u.n_inputs != B.shape[1]:
        raise DimensionError(f"plan has {plan.u.n_inputs} input channels, network has {B.shape[1]}")
    K = -D @ plan.gain @ Tp  # feedback term D w = K x
    Acl = A + K

    def f(t, x):
        return Acl @ x + B @ plan.u(t)

    x0 = plan.x0 if cfg.x0 is None else np.asarray(cfg.x0, dtype=float)
    if x0.shape != (N,):
        raise DimensionError(f"x0 must have {N} entries, got shape {x0.shape}")
    times, X = rk4(f, x0, cfg.tf, cfg.n_steps, int(cfg.record_stride))
    U = plan.u(times).reshape(len(times), -1)
    Wv = -(plan.gain @ Tp @ X.T).T
    return Trajectory(times, X, U, Wv)


class ConsensusError(NamedTuple):
    times: np.ndarray
    spread: np.ndarray  # (T, K): max_i |x_i - mean of cluster|
    z_perp_norm: np.ndarray  # (T,)


def consensus_error(traj: Trajectory, p: OrbitalPartition) -> ConsensusError:
    X = traj.states
    if X.shape[1] != p.n_nodes:
        raise DimensionError(f"trajectory has {X.shape[1]} nodes, partition {p.n_nodes}")
    spread = np.column_stack(
        [np.max(np.abs(X[:, list(c)] - X[:, list(c)].mean(axis=1, keepdims=True)), axis=1) for c in p.clusters]
    ) if len(traj) else np.zeros((0, p.n_clusters))
    Tp, _ = build_t_perp(p)
    znorm = np.linalg.norm(X @ Tp.T, axis=1) if len(traj) else np.zeros(0)
    return ConsensusError(traj.times, spread, znorm)
