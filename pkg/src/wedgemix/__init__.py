"""Wedge-flow mixing on dyadic torus grids.

Simulates alternating horizontal/vertical wedge shears on a ``2**n`` grid,
measures the dyadic mixing scale after every unit step, fits exponential
rates over ensembles, and checks invariant segments with exact rationals.
"""

from .advection import Direction, apply_flow_map, naive_pullback_oracle, unit_shear_step
from .analyzer import (DEFAULT_KAPPA, BlockSumPyramid, DegenerateFieldError, Kappa,
                       build_pyramid, field_mixing_exponent, is_mixed_at_level,
                       mixing_scale_exponent)
from .experiment import (EnsembleSummary, FitError, RunLimits, RunResult, extended_ensemble,
                         fit_rate, run_ensemble, run_simulation)
from .grid import Field, make_initial_datum, torus_grid_distance
from .kernels import BACKEND
from .packed import PackedField
from .schedule import (GENERATOR_ID, Block, FlowType, ScheduleConfig, ScheduleGenerator,
                       derive_run_seed)
from .verify import jordan_check, orbit_jacobian, verify_segment_cycle

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Block", "BlockSumPyramid", "DEFAULT_KAPPA", "DegenerateFieldError", "Direction",
    "EnsembleSummary", "Field", "FitError", "FlowType", "GENERATOR_ID", "Kappa", "PackedField",
    "RunLimits", "RunResult", "ScheduleConfig", "ScheduleGenerator", "apply_flow_map",
    "build_pyramid", "derive_run_seed", "extended_ensemble", "field_mixing_exponent", "fit_rate",
    "is_mixed_at_level", "jordan_check", "make_initial_datum", "mixing_scale_exponent",
    "naive_pullback_oracle", "orbit_jacobian", "run_ensemble", "run_simulation",
    "torus_grid_distance", "unit_shear_step", "verify_segment_cycle",
]
