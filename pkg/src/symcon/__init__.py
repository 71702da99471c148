"""Group consensus control of networks with symmetries.

Pipeline: orbital partition of the network's automorphism group, orthogonal
split into consensus and transverse coordinates, transverse spectrum,
driver-node selection, minimum-energy consensus input with stabilizing
feedback, closed-loop simulation.
"""

from .control import ControlPlan, ModalInput, gramian, min_energy_input, place_poles
from .drivers import DriverSelection, bounds, pbh_check, reduce_inputs, select_drivers
from .errors import NumericalError, SymconError, ValidationError
from .fixtures import load_fixture, load_x0
from .irr import BlockDecomposition, build_decomposition, project_states, quotient_pair
from .netmodel import ControlledNetwork, Trajectory, load_network, parse_network
from .pipeline import PipelineResult, run_pipeline
from .sim import SimConfig, consensus_error, simulate
from .spectral import TransverseSpectrum, transverse_spectrum
from .symmetry import OrbitalPartition, orbital_partition, verify_partition

__version__ = "0.1.0"

__all__ = [
    "BlockDecomposition",
    "ControlPlan",
    "ControlledNetwork",
    "DriverSelection",
    "ModalInput",
    "NumericalError",
    "OrbitalPartition",
    "PipelineResult",
    "SimConfig",
    "SymconError",
    "Trajectory",
    "TransverseSpectrum",
    "ValidationError",
    "bounds",
    "build_decomposition",
    "consensus_error",
    "gramian",
    "load_fixture",
    "load_network",
    "load_x0",
    "min_energy_input",
    "orbital_partition",
    "parse_network",
    "pbh_check",
    "place_poles",
    "project_states",
    "quotient_pair",
    "reduce_inputs",
    "run_pipeline",
    "select_drivers",
    "simulate",
    "transverse_spectrum",
    "verify_partition",
]
