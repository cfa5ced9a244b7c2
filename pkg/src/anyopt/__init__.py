"""Anytime robust stochastic optimization.

Online learners (FTRL, mirror descent / projected SGD, optimistic FTRL)
wrapped in an online-to-batch conversion that queries gradients at weighted
running averages and clips heavy-tailed feedback toward a fixed anchor, plus
closed-form high-probability envelopes and Monte Carlo audit campaigns that
check them.
"""

from .audits import AuditReport, run_audit_campaign
from .bounds import (
    BernsteinParams,
    BoundInputs,
    bernstein_deviation,
    euclidean_ball_bregman_diameter,
    q_delta,
    r_delta,
    sgd_excess_bound,
    smd_excess_bound,
)
from .conversion import AnytimeState, RunTrace, anytime_identity_audit, regret, run, weighting_update
from .datasets import CsvSchema, Dataset, SyntheticSpec, ingest_csv, load_dataset, make_synthetic
from .experiment import ExperimentConfig, ResultRecord, run_experiment
from .geometry import (
    EuclideanMap,
    GeometryError,
    L2Ball,
    NegativeEntropyMap,
    Simplex,
    bregman,
    dual_norm,
    pairing,
    primal_norm,
    project,
)
from .learners import (
    AoftrlLearner,
    FtrlLearner,
    MirrorDescentLearner,
    QuadraticRegularizer,
    aoftrl_step,
    constant_weights,
    ftrl_step,
    mirror_dual_step,
    smd_step,
    validate_mirror_schedule,
    weight_preset,
)
from .objectives import (
    MulticlassLogistic,
    Quadratic,
    ReferencePoint,
    risk_gradient,
    risk_value,
    solve_reference,
)
from .oracles import MiniBatchOracle, NoiseSpec, SyntheticOracle, certified_sigma, child_rng
from .results import emit_results, load_trace, read_results, save_trace
from .robust import (
    Anchor,
    HeuristicThreshold,
    SmoothTheoryThreshold,
    TruncationStats,
    build_anchor,
    certified_c0,
    empirical_anchor,
    exact_anchor,
    process,
)

__version__ = "0.1.0"
