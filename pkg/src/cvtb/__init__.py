"""Truncated-Fock simulation of GSP-operated two-mode optical channels."""

__version__ = "0.1.0"

from .channels import ChannelSpec, ChannelState, GspParams, build_channel
from .charfunc import channel_charfn, charfn_analytic, charfn_numeric, coherent_input, squeezed_input
from .entanglement import entanglement_capacity, log_negativity, partial_transpose
from .fock import FockCutoff, TwoModeDensity
from .teleport import QuadratureGrid, bk_fidelity, channel_epr_variance, channel_fidelity, epr_variance

__all__ = [
    "ChannelSpec",
    "ChannelState",
    "GspParams",
    "build_channel",
    "channel_charfn",
    "charfn_analytic",
    "charfn_numeric",
    "coherent_input",
    "squeezed_input",
    "entanglement_capacity",
    "log_negativity",
    "partial_transpose",
    "FockCutoff",
    "TwoModeDensity",
    "QuadratureGrid",
    "bk_fidelity",
    "channel_epr_variance",
    "channel_fidelity",
    "epr_variance",
]
