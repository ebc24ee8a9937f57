"""Metric-entropy laboratory for ReLU networks: constructive coverings and
packings, proof-traced covering-number bound formulas, brute-force oracles
on enumerable families, and a desk-scale regression rate experiment.
"""

from .bounds import (
    BitBudget,
    BoundReport,
    ConstantsLedger,
    DEFAULT_LEDGER,
    TransformVerdict,
    approx_error_bounds_H1,
    cardinality_bound,
    fc_bound,
    lip_entropy_bounds,
    quantization_bit_budget,
    quantized_bound,
    sparse_bound,
    sparse_cardinality_bound,
    transform_feasibility,
    truncated_bound,
    yang_barron_kappa,
)
from .errors import (
    DimensionError,
    DomainError,
    LabError,
    PreconditionError,
    ResourceError,
    SolverError,
)
from .network import (
    Base2Grid,
    DyadicGrid,
    FamilySpec,
    FiniteSet,
    GridFunction,
    Interval,
    NetworkConfig,
    amplify,
    augment_to_depth,
    config_from_dict,
    config_from_json,
    config_to_dict,
    config_to_json,
    evaluate,
    evaluate_batch,
    grid_distance,
    grid_points,
    lift_to_dim,
    random_config,
    sample_grid,
    truncate_as_network,
)
from .oracle import (
    FunctionCloud,
    cloud_from_configs,
    cloud_from_grid_functions,
    cloud_from_pwl,
    count_configs,
    dedup_realizations,
    entropy_sandwich,
    enumerate_configs,
    greedy_covering,
    greedy_packing,
    iter_architectures,
    stream_count_configs,
)
from .pwl import (
    PackingGrid,
    PwlFunction,
    build_packing,
    dump_packing_csv,
    exact_min_pairwise_l1,
    exact_pair_distance,
    l1_distance,
    linf_distance,
    packing_log_lower_bound,
)
from .quantize import (
    CoveringReport,
    QuantSpec,
    perturbation_bound,
    precision_for_radius,
    quantize_network,
    quantize_scalar,
    verify_covering_property,
)
from .regression import (
    BUILTIN_TARGETS,
    Bernoulli,
    ErrorEstimate,
    MaximaReport,
    RateExperiment,
    RegressionRun,
    RegressionTask,
    Uniform01,
    certificate,
    depth_schedule,
    empirical_risk,
    exact_erm_quantized,
    fit_erm,
    generate_samples,
    lipschitz_audit,
    make_task,
    maxima_lemma_check,
    prediction_error,
    rate_fit,
    run_rate_experiment,
)

__version__ = "0.1.0"
