"""End-to-end synthesis: partition, decomposition, spectrum, drivers, controller."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .control import ControlPlan, PlacementResult, gramian, min_energy_input, place_poles
from .drivers import DriverSelection, pbh_check, reduce_inputs, select_drivers
from .errors import DimensionError, SelectionFailed
from .fixtures import X0_SEED, make_x0
from .irr import BlockDecomposition, build_decomposition
from .netmodel import ControlledNetwork
from .spectral import TransverseSpectrum, transverse_spectrum
from .symmetry import DEFAULT_MAX_BACKTRACK, OrbitalPartition, orbital_partition

__all__ = ["PipelineResult", "run_pipeline", "consensus_state"]


@dataclass(frozen=True, eq=False)
class PipelineResult:
    partition: OrbitalPartition
    decomposition: BlockDecomposition
    spectrum: TransverseSpectrum
    selection: DriverSelection
    placement: PlacementResult
    plan: ControlPlan


def consensus_state(p: OrbitalPartition, values: Sequence[float]) -> np.ndarray:
    """Node vector equal to ``values[j]`` on every node of cluster ``j``."""
    values = np.asarray(values, dtype=float)
    if values.shape != (p.n_clusters,):
        raise DimensionError(f"need one consensus value per cluster ({p.n_clusters}), got {values.shape}")
    return values[p.cluster_of]


def run_pipeline(
    net: ControlledNetwork,
    targets: Union[float, Mapping[int, float]] = -2.0,
    tf: float = 5.0,
    x0: Optional[np.ndarray] = None,
    consensus: Optional[Sequence[float]] = None,
    tol: Optional[float] = None,
    group_tol: Optional[float] = None,
    max_backtrack: int = DEFAULT_MAX_BACKTRACK,
    reduce: bool = False,
    seed: int = X0_SEED,
) -> PipelineResult:
    """Build the full controller for ``net``.

    ``consensus`` holds the value each cluster should reach at ``tf``
    (default ``1, 2, .., K``).  A ``targets`` map is keyed by position in
    ``s.lambda_perp``, the non-stable groups in ascending order.  Without ``x0`` a seeded perturbation of the
    origin with zero cluster sums is used.
    """
    p = orbital_partition(net, max_backtrack=max_backtrack)
    d = build_decomposition(net, p, tol=tol)
    s = transverse_spectrum(d, group_tol=group_tol)
    sel = select_drivers(s)
    if reduce:
        sel = reduce_inputs(sel, s)
    d_perp = d.t_perp @ sel.d_matrix
    report = pbh_check(d.a_perp, d_perp, s.group_tol)
    if not report.ok:
        raise SelectionFailed(f"selected drivers fail the PBH test: {report.eigenvalues}")
    if isinstance(targets, Mapping):
        bad = [k for k in targets if not 0 <= k < len(s.lambda_perp)]
        if bad:
            raise DimensionError(f"target keys {bad} outside the {len(s.lambda_perp)} non-stable groups")
        targets = {s.lambda_perp[k]: float(v) for k, v in targets.items()}
    placement = place_poles(d.a_perp, d_perp, targets, s, full_output=True)
    if x0 is None:
        x0 = make_x0(p, seed)
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (net.n_nodes,):
        raise DimensionError(f"x0 must have {net.n_nodes} entries, got shape {x0.shape}")
    values = np.arange(1, p.n_clusters + 1, dtype=float) if consensus is None else consensus
    xf = consensus_state(p, values)
    z0, zf = d.t_parallel @ x0, d.t_parallel @ xf
    u = min_energy_input(d.a_parallel, d.b_parallel, z0, zf, tf)
    plan = ControlPlan(
        clusters=p.clusters,
        d_matrix=sel.d_matrix,
        gain=placement.gain,
        u=u,
        tf=float(tf),
        x0=x0,
        target_parallel=zf,
        gramian=gramian(d.a_parallel, d.b_parallel, 0.0, tf),
        closed_loop_spectrum=placement.certified_spectrum,
    )
    return PipelineResult(p, d, s, sel, placement, plan)
