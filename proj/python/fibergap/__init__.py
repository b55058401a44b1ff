"""Python access to the fiber Hamiltonian toolkit."""

import json as _json

from ._core import (  # noqa: F401
    BoundConstants,
    ConfigError,
    CouplingNorms,
    DirectionSet,
    FiberModel,
    GridSpec,
    ModelParams,
    NumericalError,
    apply_theta,
    check_theta_commutes,
    dispersion,
    op_sqrt_eig,
    op_sqrt_quad,
    sqrt_monotone_test,
)
from . import _core


def default_config():
    return _json.loads(_core.default_config())


def verify(config=None):
    """Run the verify suites; `config` is a dict in the CLI's JSON layout."""
    text = "" if config is None else _json.dumps(config)
    return _json.loads(_core.verify(text))
