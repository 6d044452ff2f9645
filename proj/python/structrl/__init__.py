"""Python access to the structrl oracles, learners and experiment commands."""

from ._structrl import (
    ConfigError,
    Learner,
    Mixer,
    Model,
    SolverError,
    bench,
    birth_death,
    check,
    evaluate_threshold,
    integer_sweep,
    koole_queue,
    optimal_threshold,
    piecewise_linear_mix,
    run_learner,
    rvia,
    sigma_gradient,
    sigmoid_mix,
    solve,
    sweep,
    value_iteration,
)

__all__ = [
    "ConfigError",
    "Learner",
    "Mixer",
    "Model",
    "SolverError",
    "bench",
    "birth_death",
    "check",
    "evaluate_threshold",
    "integer_sweep",
    "koole_queue",
    "optimal_threshold",
    "piecewise_linear_mix",
    "run_learner",
    "rvia",
    "sigma_gradient",
    "sigmoid_mix",
    "solve",
    "sweep",
    "value_iteration",
]
