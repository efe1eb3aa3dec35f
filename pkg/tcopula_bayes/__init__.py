from tcopula_bayes._config import RunConfig, load_config
from tcopula_bayes._copula import (
    DensityWorkspace,
    MleResult,
    log_density,
    log_density_batch,
    log_likelihood,
    mle_fit,
    simulate,
    simulate_uniforms,
    standard_t_log_density,
)
from tcopula_bayes._data import (
    CsvSchema,
    IngestResult,
    PriceSeries,
    ingest_csv,
    log_returns,
    read_matrix,
    write_matrix,
)
from tcopula_bayes._dependence import (
    kendall_corr,
    nearest_correlation,
    tau_to_correlation,
    to_pseudo_obs,
)
from tcopula_bayes._diagnostics import (
    ChainDiagnostics,
    PointEstimates,
    autocorrelation_time,
    batch_standard_error,
    diagnostics,
    point_estimates,
)
from tcopula_bayes._errors import (
    ConvergenceError,
    DataError,
    DomainError,
    SelectionError,
    ShapeError,
    TCopulaError,
    ValidationError,
)
from tcopula_bayes._evidence import (
    DicResult,
    ImportanceDensity,
    LrResult,
    dic,
    harmonic_mean_log_evidence,
    lr_test,
    posterior_model_probs,
    rise_log_evidence,
)
from tcopula_bayes._family import ModelFamily, enumerate_models
from tcopula_bayes._garch import (
    GarchParams,
    ResidualMatrix,
    filter_series,
    garch_filter,
    garch_fit,
)
from tcopula_bayes._mcmc import (
    ChainConfig,
    CopulaLogPosterior,
    PosteriorSample,
    PriorSpec,
    ProposalSpec,
    SamplerError,
    mh_step,
    run_chain,
    run_sampler,
    tune_proposals,
)
from tcopula_bayes._quadrature import QuadratureResult, integrate_adaptive
from tcopula_bayes._random import make_rng
from tcopula_bayes._risk import (
    CvarComparison,
    CvarEstimate,
    Portfolio,
    compare_models,
    cvar_from_losses,
    cvar_mc,
    load_portfolio,
    portfolio_loss,
)
from tcopula_bayes._selection import (
    ModelScore,
    SelectionOptions,
    SelectionReport,
    run_selection,
    run_selection_async,
    score_model,
)
from tcopula_bayes._special import (
    chi2_quantile,
    chi2_sf,
    chi_w_cdf,
    chi_w_quantile,
    norm_cdf,
    norm_quantile,
    t_cdf,
    t_log_pdf,
    t_quantile,
)
from tcopula_bayes._store import ChainStore, load_chain, save_chain
from tcopula_bayes._types import (
    CorrelationMatrix,
    DofVector,
    GroupConfig,
    PseudoSample,
)

__all__ = [
    "ChainConfig",
    "ChainDiagnostics",
    "ChainStore",
    "ConvergenceError",
    "CopulaLogPosterior",
    "CorrelationMatrix",
    "CsvSchema",
    "CvarComparison",
    "CvarEstimate",
    "DataError",
    "DensityWorkspace",
    "DicResult",
    "DofVector",
    "DomainError",
    "GarchParams",
    "GroupConfig",
    "ImportanceDensity",
    "IngestResult",
    "LrResult",
    "MleResult",
    "ModelFamily",
    "ModelScore",
    "PointEstimates",
    "Portfolio",
    "PosteriorSample",
    "PriceSeries",
    "PriorSpec",
    "ProposalSpec",
    "PseudoSample",
    "QuadratureResult",
    "ResidualMatrix",
    "RunConfig",
    "SamplerError",
    "SelectionError",
    "SelectionOptions",
    "SelectionReport",
    "ShapeError",
    "TCopulaError",
    "ValidationError",
    "autocorrelation_time",
    "batch_standard_error",
    "chi2_quantile",
    "chi2_sf",
    "chi_w_cdf",
    "chi_w_quantile",
    "compare_models",
    "cvar_from_losses",
    "cvar_mc",
    "diagnostics",
    "dic",
    "enumerate_models",
    "filter_series",
    "garch_filter",
    "garch_fit",
    "harmonic_mean_log_evidence",
    "ingest_csv",
    "integrate_adaptive",
    "kendall_corr",
    "load_chain",
    "load_config",
    "load_portfolio",
    "log_density",
    "log_density_batch",
    "log_likelihood",
    "log_returns",
    "lr_test",
    "make_rng",
    "mh_step",
    "mle_fit",
    "nearest_correlation",
    "norm_cdf",
    "norm_quantile",
    "point_estimates",
    "portfolio_loss",
    "posterior_model_probs",
    "read_matrix",
    "rise_log_evidence",
    "run_chain",
    "run_sampler",
    "run_selection",
    "run_selection_async",
    "save_chain",
    "score_model",
    "simulate",
    "simulate_uniforms",
    "standard_t_log_density",
    "t_cdf",
    "t_log_pdf",
    "t_quantile",
    "tau_to_correlation",
    "to_pseudo_obs",
    "tune_proposals",
    "write_matrix",
]
