"""Python bindings for the rbsgmkit C++ core."""

import json as _json

from . import _rbsgmkit as _core
from ._rbsgmkit import (
    assemble_g,
    assemble_h,
    basis_dimension,
    enumerate_indices,
    kl_1d_eigenvalues,
    kl_2d_eigenvalues,
    legendre_beta,
    oracle_check,
    secant_predict,
    ConfigError,
)

__all__ = [
    "assemble_g",
    "assemble_h",
    "basis_dimension",
    "enumerate_indices",
    "kl_1d_eigenvalues",
    "kl_2d_eigenvalues",
    "legendre_beta",
    "oracle_check",
    "secant_predict",
    "ConfigError",
    "parse_config",
    "run",
]


def _config_text(config):
    if isinstance(config, str):
        return config
    lines = []
    for key, value in config.items():
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, (list, tuple)):
            value = ", ".join(repr(float(v)) for v in value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def parse_config(config):
    """Validated configuration as a dict; accepts run-file text or a dict of keys."""
    return _json.loads(_core.parse_config(_config_text(config)))


def run(config, out_dir=None):
    """Runs one experiment. Returns (report dict, mean array, variance array).

    Artifacts are written to ``out_dir`` when it is given.
    """
    report, mean, var = _core.run(_config_text(config), "" if out_dir is None else str(out_dir))
    return _json.loads(report), mean, var
