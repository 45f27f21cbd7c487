"""csym: continuous Steiner symmetrization of sets and grid functions.

The package provides an exact 1-D interval flow, fiber-wise continuous
symmetrization of grid functions, the classical rearrangement-inequality
functionals with margin-reporting checks, local-symmetry detection, and a
radial shooting solver for torsion-type overdetermined problems, plus a
batch CLI (``csym``).
"""

__version__ = "0.1.0"

from .intervals import (
    INFINITY,
    IntervalSet,
    collision_time,
    flow,
    hausdorff_distance,
    normalize,
    steiner_1d,
)
from .grids import (
    Direction,
    GridFunction,
    MonotoneMap,
    csts,
    cutoff,
    monotone_compose,
    steiner,
    superlevel_fibers,
)
from .functionals import (
    EquationSpec,
    HypothesisError,
    WeightedIntegrand,
    boundary_layer_measure,
    cavalieri,
    dirichlet_energy,
    hardy_littlewood,
    lp_distance,
    weighted_functional,
)
from .radial import (
    RadialProfile,
    ShootingResult,
    SolverError,
    g_inverse,
    overdetermined_residual,
    rasterize,
    shoot_for_boundary,
    solve_radial,
)
from .detector import (
    Annulus,
    EnergyDerivative,
    LocalSymmetryResult,
    RadialDecomposition,
    energy_derivative,
    local_symmetry_check,
    radial_decomposition,
    reflection_point,
)

__all__ = [
    "__version__",
    "INFINITY",
    "IntervalSet",
    "normalize",
    "flow",
    "collision_time",
    "steiner_1d",
    "hausdorff_distance",
    "GridFunction",
    "Direction",
    "MonotoneMap",
    "superlevel_fibers",
    "csts",
    "steiner",
    "cutoff",
    "monotone_compose",
    "lp_distance",
    "cavalieri",
    "hardy_littlewood",
    "dirichlet_energy",
    "WeightedIntegrand",
    "weighted_functional",
    "boundary_layer_measure",
    "EquationSpec",
    "HypothesisError",
    "RadialProfile",
    "ShootingResult",
    "SolverError",
    "g_inverse",
    "solve_radial",
    "overdetermined_residual",
    "shoot_for_boundary",
    "rasterize",
    "EnergyDerivative",
    "energy_derivative",
    "reflection_point",
    "LocalSymmetryResult",
    "local_symmetry_check",
    "Annulus",
    "RadialDecomposition",
    "radial_decomposition",
]
