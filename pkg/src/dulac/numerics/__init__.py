"""Numerical ground truth: orbits, return maps, quadratures, root finding."""

from .cycles import (CycleEstimate, CycleReport, DilibertoResult, ReturnMap, Section, cycle_orbit,
                     diliberto_stability, find_cycles, return_multiplier, stability_of, winding_number)
from .ode import IntegrationError, Trajectory, integrate
from .polar import RadialSignReport, polar_radial_sign, radial_velocity
from .quadrature import (DomainError, MelnikovProblem, melnikov, melnikov_closed_form, melnikov_zero, vil_problem,
                         z_integral)
from .roots import BracketError, b_lower, b_star, b_upper, find_root, isolate_real_roots, p6_roots

__all__ = [
    "BracketError", "CycleEstimate", "CycleReport", "DilibertoResult", "DomainError", "IntegrationError",
    "MelnikovProblem", "RadialSignReport", "ReturnMap", "Section", "Trajectory", "b_lower", "b_star", "b_upper",
    "cycle_orbit", "diliberto_stability", "find_cycles", "find_root", "integrate", "isolate_real_roots", "melnikov",
    "melnikov_closed_form", "melnikov_zero", "p6_roots", "polar_radial_sign", "radial_velocity",
    "return_multiplier", "stability_of", "vil_problem", "winding_number", "z_integral",
]
