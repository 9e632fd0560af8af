"""Offline change-point detection on directed approximate k-NN graphs.

Builds a directed approximate k-nearest-neighbor graph over a sequence of
d-dimensional observations, scans the max-type edge-count statistic
M(t) = max(Z_w(t), |Z_diff(t)|) over candidate split points, and reports
change-points with analytically approximated or permutation p-values.
End-to-end cost is O(dn(log n + k log d) + nk^2).
"""

__version__ = "0.1.0"

from .analytic_pvalue import (
    AnalyticContext,
    TailApproximation,
    TripleConfigCounts,
    analytic_context,
    analytic_pvalue,
    c_functions,
    critical_value,
    nu,
    raw_moments,
    third_moments,
    triple_config_counts,
)
from .detector import (
    ScanReport,
    SegmentationResult,
    default_window,
    detect_multiple,
    detect_single,
    seeded_intervals,
)
from .edge_stats import (
    EdgeCountProfile,
    NullMoments,
    PairConfigCounts,
    ScanProcesses,
    edge_count_profile,
    null_moments,
    pair_config_counts,
    scan_moments,
    scan_processes,
)
from .errors import (
    CpknnError,
    DegenerateDenominator,
    DegenerateVariance,
    NoRoot,
    NotEnoughNeighbors,
    ParseError,
    TooFewObservations,
    UnknownFamily,
    ValidationError,
)
from .knn_graph import (
    DirectedKnnGraph,
    KdTree,
    build_graph,
    build_kdtree,
    knn_query,
    load_graph,
    save_graph,
)
from .matrix_io import DataMatrix, load_matrix, save_matrix, write_report
from .permutation import (
    PermutationPlan,
    mc_moment_estimates,
    permutation_critical_value,
    permutation_pvalue,
    replicate_maxima,
)
from .simlab import (
    Scenario,
    generate,
    null_scenario,
    power_scenario,
    run_power_study,
    run_sensitivity_study,
    run_size_study,
    run_type2_study,
    sensitivity_scenario,
    type2_scenario,
)

__all__ = [name for name in dir() if not name.startswith("_")]
