"""Distribution testing on the hypercube {-1,+1}^n with subcube-conditional
samples: a mean tester built on a pairing statistic with a doubling threshold
schedule, a recursive uniformity tester, a gaussian-mean reduction, and a
brute-force lab for the small-n structural facts behind them.
"""

from .blowup import (
    blowup_dim,
    blowup_rows,
    explicit_moments,
    gram_moments,
    iterated_blowup_rows,
    uniform_sigma_frob_sq_bound,
    uniform_sigma_frob_sq_exact,
    z_statistic_naive,
)
from .harness import (
    ExperimentSpec,
    csv_body_without_wall_time,
    resolve_gaussian_source,
    resolve_target,
    run_experiment,
    scaling_report,
)
from .meantest import (
    MeanTestConfig,
    SampleBatch,
    TauSchedule,
    default_k0,
    erf_lower_bound_holds,
    gaussian_mean_tester,
    gaussian_required_samples,
    mean_tester,
    paper_q,
    practical_q,
    second_moment_screen,
    tau_schedule,
    threshold_z_test,
    z_numerator,
    z_statistic,
)
from .model import (
    DensePmf,
    Decision,
    MeanVector,
    Point,
    ProductDistribution,
    Restriction,
    TestVerdict,
    all_sign_points,
    conditional_table,
    indices_to_points,
    load_distribution,
    mean_vector,
    points_to_indices,
    project,
    restrict,
    save_distribution,
    second_moment,
    subcube_mass,
    tv_to_uniform,
)
from .oracle import RestrictedOracle, ScondOracle
from .rng import seed_sequence, stream
from .theory import (
    InequalityReport,
    OrientedGraphs,
    VerifierReport,
    build_orientation,
    check_greedy_property,
    evaluate_robust_pisier,
    greedy_ordering,
    greedy_ordering_valid,
    khintchine_lhs,
    probe_restriction_theorem,
    random_dense_pmf,
    verify_chain_rule,
    verify_contributing_bias,
    verify_graph_to_mean,
    verify_khintchine,
    verify_variance_bound,
)
from .uniformity import (
    EdgeConfig,
    SubCondConfig,
    base_case_applies,
    edge_tester,
    subcond_uni,
    trace_query_sum,
)
from .zoo import (
    GaussianSource,
    HeavyAtomDistribution,
    JuntaMixDistribution,
    NoisyParityDistribution,
    TwoPointDistribution,
    ZooEntry,
    instantiate,
    load_entry,
    parse_spec_string,
    save_entry,
    zoo_kinds,
)

__version__ = "0.1.0"

__all__ = [
    "Decision",
    "DensePmf",
    "EdgeConfig",
    "ExperimentSpec",
    "GaussianSource",
    "HeavyAtomDistribution",
    "InequalityReport",
    "JuntaMixDistribution",
    "MeanTestConfig",
    "MeanVector",
    "NoisyParityDistribution",
    "OrientedGraphs",
    "Point",
    "ProductDistribution",
    "Restriction",
    "RestrictedOracle",
    "SampleBatch",
    "ScondOracle",
    "SubCondConfig",
    "TauSchedule",
    "TestVerdict",
    "TwoPointDistribution",
    "VerifierReport",
    "ZooEntry",
    "all_sign_points",
    "base_case_applies",
    "blowup_dim",
    "blowup_rows",
    "build_orientation",
    "check_greedy_property",
    "conditional_table",
    "csv_body_without_wall_time",
    "default_k0",
    "edge_tester",
    "erf_lower_bound_holds",
    "evaluate_robust_pisier",
    "explicit_moments",
    "gaussian_mean_tester",
    "gaussian_required_samples",
    "gram_moments",
    "greedy_ordering",
    "greedy_ordering_valid",
    "indices_to_points",
    "instantiate",
    "iterated_blowup_rows",
    "khintchine_lhs",
    "load_distribution",
    "load_entry",
    "mean_tester",
    "mean_vector",
    "paper_q",
    "parse_spec_string",
    "points_to_indices",
    "practical_q",
    "probe_restriction_theorem",
    "project",
    "random_dense_pmf",
    "resolve_gaussian_source",
    "resolve_target",
    "restrict",
    "run_experiment",
    "save_distribution",
    "save_entry",
    "scaling_report",
    "second_moment",
    "second_moment_screen",
    "seed_sequence",
    "stream",
    "subcond_uni",
    "subcube_mass",
    "tau_schedule",
    "threshold_z_test",
    "trace_query_sum",
    "tv_to_uniform",
    "uniform_sigma_frob_sq_bound",
    "uniform_sigma_frob_sq_exact",
    "verify_chain_rule",
    "verify_contributing_bias",
    "verify_graph_to_mean",
    "verify_khintchine",
    "verify_variance_bound",
    "z_numerator",
    "z_statistic",
    "z_statistic_naive",
    "zoo_kinds",
]
