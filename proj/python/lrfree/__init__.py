"""Parameter-scaled Polyak and D-Adaptation optimizers."""

import json as _json

from ._lrfree import (
    ConfigError,
    DomainError,
    Objective,
    PsDaState,
    ScalingState,
    UsageError,
    check_invariants,
    effective_preconditioner,
    ew_div,
    ew_inv,
    ew_max,
    ew_mul,
    gamma,
    inner,
    invariant_suites,
    l1,
    logistic,
    naive_scaled_sps_step,
    norm2,
    ps_da_sgd_step,
    ps_sps_step,
    quadratic,
    sps_lr,
)
from ._lrfree import run_config as _run_config


def run(config):
    """Run an experiment. `config` is a dict or JSON text."""
    if not isinstance(config, str):
        config = _json.dumps(config)
    return _run_config(config)


__all__ = [
    "ConfigError",
    "DomainError",
    "Objective",
    "PsDaState",
    "ScalingState",
    "UsageError",
    "check_invariants",
    "effective_preconditioner",
    "ew_div",
    "ew_inv",
    "ew_max",
    "ew_mul",
    "gamma",
    "inner",
    "invariant_suites",
    "l1",
    "logistic",
    "naive_scaled_sps_step",
    "norm2",
    "ps_da_sgd_step",
    "ps_sps_step",
    "quadratic",
    "run",
    "sps_lr",
]
