"""Space-time and multi-time PGD for cyclic elasto-plasticity in 2D."""
from .cases import (CaseSpec, Geometry, LoadWaveform, build_cracked_plate, build_dogbone,
                    build_mesh, build_rectangle, dogbone_case, make_waveform, plate_case)
from .config import RunConfig, load_config, parse_config
from .driver import SolveReport, run, solve_elastic
from .fem import Material, Mesh, StiffnessSystem, assemble_stiffness
from .multitime import MultiTimeGrid, MultiTimeModes, decompose, decompose_field, make_grid, reconstruct
from .pgd import SeparatedRhs, SpaceTimeField, compress_rhs, evaluate_field, pgd_solve
from .plasticity import (PlasticState, cycle_increments, history_sweep, plastic_rhs,
                         trial_and_return)
from .reference import IncrementalSolution, probe, solve_incremental

__version__ = "0.1.0"
