"""Spectral lab for NLS, quantum hydrodynamics and the Madelung transform on the torus."""
from .exceptions import InversionError, NonFiniteError, ResolutionError, VacuumError, WindingError
from .grid import Grid, read_field_csv, relative_error, write_field_csv
from .hamiltonians import MODELS, NonlinearityModel, get_model, hamiltonian_cf, hamiltonian_nls, nls_rhs, qhd_rhs
from .madelung import madelung, pullback_gradient, pushforward, winding_numbers
from .states import (
    AlgebraElement,
    FluidState,
    GroupElement,
    PolarDecomposition,
    WaveFunction,
    from_polar,
    to_polar,
)
from .brackets import FluidFunctional, PsiFunctional, pb_fluid, pb_psi
from .symmetry import algebra_act, compose, flow, group_act, lie_bracket, moment, pairing
from .dynamics import Trajectory, compare_flows, evolve, step_rk4, step_strang_nls

__version__ = "0.1.0"
