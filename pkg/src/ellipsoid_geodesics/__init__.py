"""Geodesic flow on ellipsoids in R^4: integrals, separation, bifurcation
diagrams, natural actions and monodromy."""

from .errors import EllipsoidError
from .geometry import (
    EllipsoidSpec,
    IntegralValues,
    PhasePoint,
    Symmetry,
    casimirs,
    dirac_structure,
    hamiltonian_vector_field,
    random_leaf_point,
    symmetric_integrals,
    uhlenbeck_integrals,
)
from .dynamics import Trajectory, integrate, project_to_leaf, section_identity, separatrix_section
from .separation import from_ellipsoidal, qtilde, separation_constants, to_ellipsoidal
from .bifurcation import generic_diagram, symmetric_diagram
from .actions import ActionFrame, action_I2, action_I3, action_frame, action_gradient, residue_at_pole
from .monodromy import MonodromyResult, TransitionMatrix, glue_matrices, normal_form
from .elliptic import RevolutionParams, revolution_action, revolution_action_quadrature

__version__ = "0.1.0"
