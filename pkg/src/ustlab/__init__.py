"""ustlab: spanning-tree measures, loop-erased random walks, and lattice
experiments, with exact small-graph oracles."""

__version__ = "0.1.0"

from .config import Budgets, DEFAULT_BUDGETS
from .errors import ResourceLimitError, SpecValidationError, StepBudgetExceeded
from .graph import (
    LatticeBox,
    MinorMap,
    MultiGraph,
    build_box,
    contract,
    delete,
    is_connected,
    wired_quotient,
)
from .paths import (
    Path,
    gamma_fiber,
    intersection_count,
    loop_erase,
    path_weight,
    paths_intersect,
    phi_fiber,
    verify_fiber_multisets,
)
from .rng import RngStream
from .walks import (
    LerwResult,
    SpanningSubgraph,
    StopAfterSteps,
    StopOnHit,
    StopWhenCovered,
    aldous_broder_tree,
    first_entry_tree,
    lerw_sample,
    mu3_sequential_sample,
    srw_path,
    tree_path,
)
from .exact import (
    HarmonicSolution,
    brute_force_tree_enumeration,
    cylinder_probability,
    edge_current_fraction,
    exact_lerw_law,
    green_function_exact,
    harmonic_hitting_probability,
    mu3_exact_law,
    spanning_tree_count,
)
from .experiments import (
    EstimateResult,
    FreeWiredRow,
    IntersectionMoments,
    SlopeFit,
    component_density_check,
    connection_probability,
    fit_power_law,
    free_wired_gap,
    green_function_scaling,
    intersection_moments,
    intersection_probability,
    separator_probability,
)
from .records import ExperimentSpec, ResultRecord, parse_spec, write_results
