"""Robust linear regression by adaptive modified maximum likelihood.

The main entry point is :func:`ramml.fit` (or :func:`ramml.fit_method`),
which returns AMML or leverage-robust RAMML estimates started from an LTS or
S fit.  The package also provides the starting estimators, the SEP/MSE
criteria, and a Monte-Carlo engine for contaminated regression designs.
"""
from .amml import (METHODS, EstimatorConfig, FitResult, Initializer, Variant, WeightSet,
                   compute_alpha_delta, compute_delta_x, final_weights, fit, fit_method,
                   solve_modified_likelihood)
from .datasets import RegressionData, load_aircraft, load_starscyg
from .distributions import ErrorLaw, LtsParams, equicorrelation, lts_pdf, sample_error, sample_predictors
from .evaluation import MetricReport, mse_coefficients, mse_scale, sep
from .exceptions import (AllTiesInV, DegenerateDirection, DegenerateScale, DimensionMismatch,
                         InvalidCorrelation, InvalidParams, NotConverged, RammlError, SingularSystem,
                         TooFewObservations, ZeroTotalWeight)
from .initial import InitialFit, fit_lts, fit_median_slope, fit_mm, fit_ols, fit_s
from .location import l1_median, mad_scale, median, scaled_leverage_distance
from .simulation import (CellResult, ScenarioSpec, TrueModel, generate_replication, make_true_model,
                         run_cell, run_table)

__version__ = "0.1.0"
