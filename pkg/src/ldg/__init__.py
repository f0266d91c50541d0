"""
Uniaxial solutions of the Landau-de Gennes Q-tensor model.

Tensor algebra, the reduced energy, director families, residual
evaluators for the Euler-Lagrange systems, and solvers for the radial
hedgehog, order-parameter fitting and energy descent.
"""
from .model import ReducedParams, s_plus, psi
from .tensor import uniaxial_compose, uniaxial_decompose, biaxiality_measure
from .hedgehog import solve_hedgehog
from .euler import euler_ode_exponents
from .fit import fit_order_parameter
from .flow import minimize_gradient_flow

__version__ = "0.1.0"

__all__ = [
    "ReducedParams", "s_plus", "psi", "uniaxial_compose", "uniaxial_decompose",
    "biaxiality_measure", "solve_hedgehog", "euler_ode_exponents", "fit_order_parameter",
    "minimize_gradient_flow",
]
