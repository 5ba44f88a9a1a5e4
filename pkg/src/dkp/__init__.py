"""Discrete KP lattice system on an N x M torus: spectral curve, flow kernels, flow."""
from .curve import (
    BetaZeroSpectrum,
    CurvePolynomial,
    NewtonPolygon,
    assemble_W,
    beta_zero_spectrum,
    block_X,
    curve_polynomial,
    det_W,
    expected_support,
    newton_genus,
    special_state,
    split_product,
    support,
)
from .eigen import (
    CurvePoint,
    KernelVector,
    curve_points_at_beta,
    kernel_vector,
    minor_ratio,
    quasi_periodicity_check,
)
from .errors import ConstraintError, DegenerateError, DKPError, InvariantError, StateFileError
from .flow import DriftReport, FlowDerivative, conserved_vector, flow_rhs, integrate
from .kappa import Case, SignTable, build_kappa, build_phi, build_rho, euclid_case
from .lattice import LatticeState, TorusIndex, canonical_index, load_state, random_state, save_state

__version__ = "0.1.0"
