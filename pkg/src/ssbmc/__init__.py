"""Bounded model checking of fixed-point state-space digital controllers."""
from .fixedpoint import FixedPointFormat, FxNum, quantize
from .statespace import StateSpaceSystem, QuantizedSystem, quantize_system, close_loop

__all__ = ["FixedPointFormat", "FxNum", "quantize", "StateSpaceSystem", "QuantizedSystem",
           "quantize_system", "close_loop"]
__version__ = "0.1.0"
