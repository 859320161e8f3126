"""Experiment harness: reports, input families and the experiments."""

from .experiments import (
    EXPERIMENTS,
    AveragingOp,
    KernelOp,
    averaging_closed_form,
    averaging_equivalence_check,
    ball_independence_check,
    bfs_axiom_check,
    bmo_necessity_experiment,
    characteristic_condition,
    characteristic_ratio,
    chi_duality_check,
    fefferman_stein_check,
    holder_check,
    operator_norm_estimate,
    oscillation_pair_ratio,
    truncation_convergence_check,
    w_class_experiment,
)
from .report import ExperimentReport, recompute_verdict, verdict_from_checks
