"""Python surface of the task offloading simulator.

Everything heavy lives in the compiled extension; this package only re-exports
it and adds a couple of conveniences for notebook use.
"""

from ._core import (
    BudgetError,
    ConfigError,
    LinkSpec,
    NodeSpec,
    ScenarioConfig,
    ScenarioInstance,
    Solution,
    TaskClassSpec,
    default_config,
    generate_instance,
    load_config,
    run_class_experiment_csv,
    run_dto,
    run_jto,
    run_sweep_csv,
    validate,
    validate_solution,
)

__all__ = [
    "BudgetError",
    "ConfigError",
    "LinkSpec",
    "NodeSpec",
    "ScenarioConfig",
    "ScenarioInstance",
    "Solution",
    "TaskClassSpec",
    "default_config",
    "generate_instance",
    "load_config",
    "load_config_file",
    "run_class_experiment_csv",
    "run_dto",
    "run_jto",
    "run_sweep_csv",
    "validate",
    "validate_solution",
]


def load_config_file(path):
    """Parse a config file from disk (same format as the CLI accepts)."""
    with open(path, "r", encoding="utf-8") as fh:
        return load_config(fh.read())
