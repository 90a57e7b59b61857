"""corruptlab: analysis and simulation of learning from corrupted data.

Finite distributions and Markov kernels (`kernels`), f-divergences and
contraction coefficients (`divergence`), loss reconstruction (`reconstruct`),
parametric corruption families (`catalog`), upper and lower risk bounds
(`bounds`), budgeted data acquisition (`planner`) and seeded Monte-Carlo
experiments (`simlab`).
"""

from .kernels import (
    Dist,
    Kernel,
    Space,
    compose,
    identity,
    make_dist,
    normalized,
    parallel_product,
    point_mass,
    pullback,
    pushforward,
    replicate,
    uniform,
)
from .divergence import KL, VARIATIONAL, FGenerator, alpha, f_divergence, lambda_coeff, sdpi_check, variational
from .reconstruct import (
    LossTable,
    Reconstruction,
    corrected_loss,
    corrected_sup_norm,
    is_reconstructible,
    op_norm_row_sum,
    pseudoinverse,
    sandwich_report,
    zero_one_loss,
)
from .catalog import (
    CorruptionSpec,
    binary_label_noise,
    build_kernel,
    closed_form_stats,
    partial_labels,
    semi_supervised,
    symmetric_label_noise,
)
from .bounds import (
    DecisionProblem,
    MixedCorruption,
    MixedSource,
    bernstein_constant,
    eta_compatibility,
    fastrate_gamma,
    lecam_bound,
    lecam_corrupted,
    lecam_mixed,
    lecam_replicated,
    pacbayes_mixed,
    pacbayes_upper,
    regret,
    separation,
)
from .planner import AcquisitionPlan, SourceOffer, exact_plan, greedy_plan, rank_sources_lower, rank_sources_upper
from .simlab import (
    CanonicalProperLoss,
    ExperimentConfig,
    FastRateReport,
    RiskCurve,
    corrupt,
    erm,
    fastrate_curve,
    fit_proper,
    gradient_check,
    log_loss,
    risk_curve,
    sample,
)

__version__ = "0.1.0"
