"""Two-layer ReLU networks as explicit piecewise-linear constructions."""

from .geometry import Hyperplane, StrictPartialOrder, build_arrangement, verify_order
from .network import AffinePiece, PiecewiseLinear, ReluNetwork, ReluUnit, extract_pieces
from .spline1d import BasisPlan, Spline1D, compile_one_sided, compile_two_sided

__version__ = "0.1.0"
