"""Transonic shock past a near-straight wedge: polar, potential reduction and elliptic free-boundary solve."""
from .gas import FlowState, GasModel

__version__ = "0.1.0"
__all__ = ["FlowState", "GasModel", "__version__"]
