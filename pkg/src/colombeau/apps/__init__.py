"""Regularized differential equations solved through the representative machinery."""

from .ode import Trajectory, ode_moderateness_probe, ode_representative, solve_delta_ode
from .wave import (WaveField, contraction_bound, retarded_potential_reference, solve_wave_1d,
                   solve_wave_kirchhoff)

__all__ = ["Trajectory", "WaveField", "contraction_bound", "ode_moderateness_probe", "ode_representative",
           "retarded_potential_reference", "solve_delta_ode", "solve_wave_1d", "solve_wave_kirchhoff"]
