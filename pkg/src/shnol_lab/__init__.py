"""Shnol-type spectral certificates for Schrödinger operators on weighted graphs.

Build a graph, a form and an eigenfunction; check criticality, transform by
the ground state and certify ``lambda`` in the spectrum with explicit Weyl
sequences.
"""
__version__ = "0.1.0"

from .criticality import (CapacityTrace, CouplingResult, CriticalityVerdict, critical_coupling,
                          criticalize, detect_criticality, equilibrium_potential, green_function,
                          null_sequence)
from .errors import (ConfigError, ConvergenceError, NotNonnegativeError, NotPositiveDefiniteError,
                     PreconditionError, ShnolError)
from .forms import (FormHandle, apply_operator, d_b, energy_norm, eval_form, inner,
                    leibniz_residual, norm, operator_norm_bound)
from .graph import (BoundedPotential, Exhaustion, VertexFunction, WeightedGraph, build_lattice,
                    build_regular_tree, dump_graph, load_graph, restrict)
from .gst import TransformedSystem, ground_state_transform, transform_function
from .numerics import (SymmetricOperator, count_below, dense_spectrum, lowest_eigenpair,
                       nearest_eigenvalue, solve_spd)
from .shnol import (EigenfunctionSpec, ShnolOptions, ShnolReport, build_eigenfunction,
                    caccioppoli_audit, certificate, is_generalized_eigenfunction, shnol_verify,
                    spectral_distance, weyl_defect, weyl_vector)

__all__ = [
    "__version__", "CapacityTrace", "CouplingResult", "CriticalityVerdict",
    "critical_coupling", "criticalize", "detect_criticality", "equilibrium_potential",
    "green_function", "null_sequence", "ConfigError", "ConvergenceError",
    "NotNonnegativeError", "NotPositiveDefiniteError", "PreconditionError", "ShnolError",
    "FormHandle", "apply_operator", "d_b", "energy_norm", "eval_form", "inner",
    "leibniz_residual", "norm", "operator_norm_bound", "BoundedPotential", "Exhaustion",
    "VertexFunction", "WeightedGraph", "build_lattice", "build_regular_tree", "dump_graph",
    "load_graph", "restrict", "TransformedSystem", "ground_state_transform",
    "transform_function", "SymmetricOperator", "count_below", "dense_spectrum",
    "lowest_eigenpair", "nearest_eigenvalue", "solve_spd", "EigenfunctionSpec", "ShnolOptions",
    "ShnolReport", "build_eigenfunction", "caccioppoli_audit", "certificate",
    "is_generalized_eigenfunction", "shnol_verify", "spectral_distance", "weyl_defect",
    "weyl_vector",
]
