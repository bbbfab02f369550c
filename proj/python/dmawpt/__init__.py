"""DMA wireless power transfer beamforming toolkit."""

import json as _json

from ._core import (
    ConfigError,
    InfeasibleProblem,
    IoError,
    MaterialSpec,
    ZeroArray,
    __version__,
    array_shape,
    lorentzian_weight,
    material,
    materials,
    microstrip,
    mrt_lower_bound,
    project_to_lorentzian,
    solve_fd,
)
from . import _core


def _text(config):
    return config if isinstance(config, str) else _json.dumps(config)


def run_experiment(config):
    """Run a config (dict or JSON text); one dict per record."""
    return _core.run_experiment(_text(config))


def records_csv(config):
    return _core.records_csv(_text(config))


def optimize_scene(config, realization=0, method="EB_ASD", seed=1):
    return _core.optimize_scene(_text(config), realization, method, seed)


__all__ = [
    "ConfigError",
    "InfeasibleProblem",
    "IoError",
    "MaterialSpec",
    "ZeroArray",
    "__version__",
    "array_shape",
    "lorentzian_weight",
    "material",
    "materials",
    "microstrip",
    "mrt_lower_bound",
    "optimize_scene",
    "project_to_lorentzian",
    "records_csv",
    "run_experiment",
    "solve_fd",
]
