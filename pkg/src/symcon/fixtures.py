"""Bundled example networks and their seeded initial states.

``net8``: eight nodes, clusters {1,2,3,4}, {5,6}, {7,8}, one input on 7 and 8.
``net48``: 48 nodes, clusters of 20, 16 and 12 nodes, one input on 21..36.

Initial states are ``x0 = base + 0.5 * eta`` with ``eta`` a unit vector whose
entries sum to zero on every cluster, drawn with a fixed seed, so ``x0``
has the same cluster means as ``base``.
"""

from __future__ import annotations

from importlib import resources

import numpy as np

from .irr import build_t_perp
from .netmodel import ControlledNetwork, parse_network
from .symmetry import OrbitalPartition

__all__ = ["FIXTURES", "fixture_text", "load_fixture", "load_x0", "make_x0", "X0_SEED", "X0_SCALE"]

FIXTURES = ("net8", "net48")
X0_SEED = 42
X0_SCALE = 0.5


def fixture_text(name: str) -> str:
    return resources.files("symcon.data").joinpath(f"{name}.txt").read_text(encoding="utf-8")


def load_fixture(name: str) -> ControlledNetwork:
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; choose from {FIXTURES}")
    return parse_network(fixture_text(name))


def make_x0(p: OrbitalPartition, seed: int = X0_SEED, scale: float = X0_SCALE, base=None) -> np.ndarray:
    """``base + scale * eta``: ``eta`` unit-norm with zero sum on every cluster."""
    Tp, _ = build_t_perp(p)
    g = np.random.default_rng(seed).standard_normal(Tp.shape[0])
    eta = Tp.T @ g
    nrm = np.linalg.norm(eta)
    eta = eta / nrm if nrm > 0 else eta
    base = np.zeros(p.n_nodes) if base is None else np.asarray(base, dtype=float)
    return base + scale * eta


def load_x0(name: str) -> np.ndarray:
    """Shipped initial state of a fixture (one value per line)."""
    text = resources.files("symcon.data").joinpath(f"{name}_x0.txt").read_text(encoding="utf-8")
    lines = (ln.strip() for ln in text.splitlines())
    return np.array([float(ln) for ln in lines if ln and not ln.startswith("#")])
