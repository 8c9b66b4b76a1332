"""Optimal dynamic bias/precision persuasion with a persistent Gaussian state."""

from persuasion.exceptions import DomainError, IncompatibleError, InfeasibleError
from persuasion.multidim import MultiDimSolution, MultiParams, solve_multidim
from persuasion.obedience import PathPair, continuation_loss, reservation_loss, sender_loss, verify_obedience
from persuasion.policy import PolicySolution, Regime, pareto_point, solve, solve_deterministic
from persuasion.reporting import VariancePath, build_reporting_function, induced_variance, is_bayes_plausible
from persuasion.simulation import SimConfig, simulate_deviation, simulate_policy
from persuasion.state_process import NO_REPORT, ProcessParams, eta, posterior_given_report
from persuasion.two_period import TwoPeriodParams, solve_two_period

__version__ = "0.1.0"

__all__ = [
    "DomainError", "IncompatibleError", "InfeasibleError", "MultiDimSolution", "MultiParams",
    "NO_REPORT", "PathPair", "PolicySolution", "ProcessParams", "Regime", "SimConfig",
    "TwoPeriodParams", "VariancePath", "build_reporting_function", "continuation_loss", "eta",
    "induced_variance", "is_bayes_plausible", "pareto_point", "posterior_given_report",
    "reservation_loss", "sender_loss", "simulate_deviation", "simulate_policy", "solve",
    "solve_deterministic", "solve_multidim", "solve_two_period", "verify_obedience",
]
