"""Data-driven stochastic optimal control with kernel-embedding gradients."""

from .boxes import Box
from .embedding import EmbeddingEstimate, SampleSet, cost_vector, default_regularization, fit
from .kernel import KernelParams, eval_kernel, eval_kernel_partial, gram_product, kernel_vector
from .optimizer import (
    AdmissibleSet,
    ControlBox,
    DescentConfig,
    DescentTrace,
    Termination,
    descend,
    lp_initialize,
    lp_select,
    project_box,
    solve,
)
from .systems import (
    IntegratorModel,
    TargetTrajectory,
    Trajectory,
    UnicycleModel,
    draw_sample_set,
    oracle_integrator_control,
    regulation_cost,
    simulate_closed_loop,
    tracking_cost,
)

__all__ = [
    "Box",
    "EmbeddingEstimate",
    "SampleSet",
    "cost_vector",
    "default_regularization",
    "fit",
    "KernelParams",
    "eval_kernel",
    "eval_kernel_partial",
    "gram_product",
    "kernel_vector",
    "AdmissibleSet",
    "ControlBox",
    "DescentConfig",
    "DescentTrace",
    "Termination",
    "descend",
    "lp_initialize",
    "lp_select",
    "project_box",
    "solve",
    "IntegratorModel",
    "TargetTrajectory",
    "Trajectory",
    "UnicycleModel",
    "draw_sample_set",
    "oracle_integrator_control",
    "regulation_cost",
    "simulate_closed_loop",
    "tracking_cost",
]

__version__ = "0.1.0"
