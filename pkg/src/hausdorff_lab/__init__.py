"""Finite-level computations for Hausdorff dimension in groups over F_p[[t]]."""

from .fpt_ring import RingCtx, TruncatedSeries, SeriesMatrix, FpSubspace, fp_rref, fp_nullspace
from .matrix_groups import GroupSpec, InvariantError, borel_dimension, layer_dimension, dimension_trace
from .hausdorff import CoordinateSubgroupSpec, ExponentSet, abelian_trace, realize_dimension
from .graded_lie import LieAlgebra, lie_from_spec, is_simple_bruteforce, loop_subalgebra_closure, density_trace

__version__ = "0.1.0"
