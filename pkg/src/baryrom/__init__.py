"""baryrom: parametric reduced-order models from barycentric subspace interpolation."""

__version__ = "0.1.0"

from .errors import (
    BaryromError,
    ConfigError,
    DataIntegrityError,
    DivergedSolutionError,
    DuplicateNodesError,
    NotConvergedError,
    RankDeficientError,
    RankTooSmallError,
    ShapeMismatchError,
    SingularMassError,
    SingularOverlapError,
    ZeroReferenceError,
)
from .manifold import (
    BarycenterResult,
    distance,
    exp_map,
    itsgm_interpolate,
    karcher_barycenter,
    log_map,
    orthonormalize,
    procrustes_rotation,
    subspace_distance,
)
from .metrics import ErrorReport, error_at_time, mean_error, probe
from .pod import (
    InnerProduct,
    PODBasis,
    SnapshotMatrix,
    compute_pod,
    energy_fraction,
    global_mean,
)
from .rom import (
    CrossGalerkinTensors,
    ReducedModel,
    ReducedTrajectory,
    assemble_cross_tensors,
    combined_basis,
    direct_project,
    initial_condition,
    integrate_rom,
    reconstruct_field,
    update_reduced_model,
)
from .solver import Grid1D, SolverConfig, initial_profile, run, step
from .weights import WeightScheme, WeightVector, evaluate_weights, select_neighbors
