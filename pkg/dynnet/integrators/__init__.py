from .grid         import TimeGrid, Trajectory, as_row
from .coefficients import SolverScheme, lmm_coefficients, parse_scheme
from .runge_kutta  import rk4_start, rkf45_integrate
from .newton       import NewtonResult, implicit_step_solve
from .multistep    import integrate, lmm_integrate
from .stability    import StabilityRegion, is_absolutely_stable, stability_boundary
