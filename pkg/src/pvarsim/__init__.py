"""Monte Carlo toolkit for zero-energy decompositions of F(B), p-variation
estimation along deterministic and crossing-time partitions, and the
conditional-median process simulated through time-reversed driven flows.
"""

from .config import ExperimentConfig, load_config
from .errors import (
    ConfigError,
    DomainError,
    GridError,
    NumericalError,
    PvarsimError,
)
from .experiments import (
    RegressionFit,
    fbm_theorem_experiment,
    fit_loglog,
    mean_ci,
    pvar_histogram_experiment,
    single_increment_experiment,
)
from .grids import Grid, SampledPath
from .median_flow import (
    DriverSequence,
    FlowState,
    MedianSample,
    cond_exp_median,
    diffusion_sigma,
    direct_median_oracle,
    euler_flow,
    flow_derivative,
    flow_inverse_check,
    gaussian_driver,
    lamperti,
    lamperti_inv,
    median_from_flow,
    rademacher_driver,
    reversed_driver,
    scale_lamperti,
    scale_lamperti_inv,
    scale_map,
)
from .paths import (
    BmPath,
    FbmPath,
    default_half_length,
    fbm_cov,
    fbm_cov_matrix,
    mixing_bound,
    mixing_bound_sharp,
    sample_bm,
    sample_fbm,
    translated_cov,
)
from .pvariation import (
    CEstimate,
    Partition,
    PVarEstimate,
    crossing_times,
    estimate_c,
    p_variation,
    theorem1_statistic,
    theorem2_statistic,
)
from .rng import mix_seed, splitmix64
from .zero_energy import (
    AntiderivativeGrid,
    RescaledPair,
    ZeroEnergyPath,
    antiderivative,
    eval_F,
    eval_Fprime,
    ito_sum,
    rescale_pair,
    rescaled_zero_energy,
    scaling_check,
    zero_energy_path,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
