"""Goodness-of-fit tests for bivariate extreme-value copulas."""

__version__ = "0.1.0"

from .empirical import PseudoSample, empirical_copula, pseudo_observations, sample_rho, sample_tau
from .estimation import FitResult, ModelSpec, fit_irho, fit_itau, fit_mpl
from .families import (
    CopulaModel,
    cdf,
    density,
    mo_tau_bound,
    pickands_value,
    rho_of_theta,
    sample,
    tau_of_theta,
    theta_of_tau,
)
from .gof import GofConfig, GofResult, bootstrap_many, bootstrap_test, statistic_Sn, statistic_Tn
from .ltd import fgm_closed_form, frechet_bound_functionals, functional_value, ltd_check
from .pickands import curve, estimate_CFG, estimate_corrected, estimate_P, xi
from .power import PowerTable, Scenario, paper_suite, run_scenario, run_scenarios

__all__ = [
    "CopulaModel", "FitResult", "GofConfig", "GofResult", "ModelSpec", "PowerTable", "PseudoSample",
    "Scenario", "bootstrap_many", "bootstrap_test", "cdf", "curve", "density", "empirical_copula",
    "estimate_CFG", "estimate_P", "estimate_corrected", "fgm_closed_form", "fit_irho", "fit_itau",
    "fit_mpl", "frechet_bound_functionals", "functional_value", "ltd_check", "mo_tau_bound",
    "paper_suite", "pickands_value", "pseudo_observations", "rho_of_theta", "run_scenario",
    "run_scenarios", "sample", "sample_rho", "sample_tau", "statistic_Sn", "statistic_Tn",
    "tau_of_theta", "theta_of_tau", "xi",
]
