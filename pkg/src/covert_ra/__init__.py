"""Covert random-access communication over AWGN channels.

Encoders and decoders for BPSK spread-spectrum senders, analytic reliability
and covertness bounds, numerical divergences and Monte Carlo estimators.
"""
__version__ = "0.1.0"

from .params import (ActiveExceedsTotal, ChannelParams, NonPositiveParameter, ParameterError,
                     ProtocolConfig, Scenario, VarianceOutsideInterval, scaling_family, validate)
from .bounds import BoundReport, bound_report

__all__ = [
    "ActiveExceedsTotal", "BoundReport", "ChannelParams", "NonPositiveParameter", "ParameterError",
    "ProtocolConfig", "Scenario", "VarianceOutsideInterval", "bound_report", "scaling_family",
    "validate", "__version__",
]
