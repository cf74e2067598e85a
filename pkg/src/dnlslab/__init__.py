"""Numerical lab for the derivative nonlinear Schrodinger equation in gauge form.

The evolved equation is ``u_t = i u_xx + i u (Im(u conj(u_x)) + 3/16 |u|^4)`` on a
periodic grid. Submodules:

numerics     grids, spectral derivatives, norms and field I/O
waves        travelling-wave profiles and their parameter derivatives
functionals  mass, momentum, energy and the action
gauge        the gauge transform and its inverse
evolve       integrating-factor RK4 time stepping with observers
spectral     linearized operators, kernels and coercivity checks
modulation   modulation fits for one or two travelling waves
monotone     cutoffs, localized functionals and almost-monotonicity audits
lab          experiment configs, runners and the CLI backend
"""

from .numerics import Field, GridSpec
from .waves import WaveParams

__all__ = ["Field", "GridSpec", "WaveParams"]
__version__ = "0.1.0"
