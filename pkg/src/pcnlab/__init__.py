"""pcnlab: physician collaboration network analytics from insurance claims.

Builds per-hospital physician collaboration networks out of claims data and
analyses them with centrality/centralization measures, outcome regressions
with age moderation, and Markov random-graph (ERG) model fitting with
convergence diagnostics and group comparison.
"""

__version__ = "0.1.0"

from .centrality import (
    CentralityVector,
    CentralizationReport,
    betweenness_centrality,
    betweenness_centralization,
    centralization_report,
    degree_centrality,
    degree_centralization,
)
from .claims import (
    AdmissionRecord,
    ClaimKind,
    ClaimRecord,
    ClaimValidationError,
    Gender,
    HospitalOutcomes,
    build_admissions,
    hospital_outcomes,
    parse_claims,
    write_claims_csv,
)
from .ergm import (
    BoundaryStatisticError,
    ErgFit,
    ErgParams,
    ErgStatistics,
    McmcConfig,
    change_statistics,
    compare_parameter_groups,
    count_statistics,
    estimate_parameters,
    parameter_significance,
    sample_graphs,
    sample_statistics,
)
from .generator import GeneratorConfig, GeneratorConfigError, generate_synthetic_claims
from .network import (
    PCN,
    BipartiteGraph,
    build_bipartite,
    density,
    partition_pcns,
    project_pcn,
    read_edge_lists,
    write_edge_lists,
)
from .pipeline import FrameworkReport, PipelineConfig, PipelineError, run_pipeline
from .stats import (
    CollinearityError,
    RegressionFit,
    TTestResult,
    ols_moderation,
    ols_simple,
    t_distribution_sf,
    two_sample_ttest,
)

__all__ = [
    "AdmissionRecord",
    "BipartiteGraph",
    "BoundaryStatisticError",
    "CentralityVector",
    "CentralizationReport",
    "ClaimKind",
    "ClaimRecord",
    "ClaimValidationError",
    "CollinearityError",
    "ErgFit",
    "ErgParams",
    "ErgStatistics",
    "FrameworkReport",
    "Gender",
    "GeneratorConfig",
    "GeneratorConfigError",
    "HospitalOutcomes",
    "McmcConfig",
    "PCN",
    "PipelineConfig",
    "PipelineError",
    "RegressionFit",
    "TTestResult",
    "betweenness_centrality",
    "betweenness_centralization",
    "build_admissions",
    "build_bipartite",
    "centralization_report",
    "change_statistics",
    "compare_parameter_groups",
    "count_statistics",
    "degree_centrality",
    "degree_centralization",
    "density",
    "estimate_parameters",
    "generate_synthetic_claims",
    "hospital_outcomes",
    "ols_moderation",
    "ols_simple",
    "parameter_significance",
    "parse_claims",
    "partition_pcns",
    "project_pcn",
    "read_edge_lists",
    "run_pipeline",
    "sample_graphs",
    "sample_statistics",
    "t_distribution_sf",
    "two_sample_ttest",
    "write_claims_csv",
    "write_edge_lists",
]
