from .autodiff     import Tape, Tensor, backward, finite_diff_gradient, no_record, record
from .errors       import ConfigError, ConvergenceError, DynnetError, NonFiniteError, ShapeError, SolverError, TapeError
from .modeling.mlp import NetworkParams, forward, init_network, time_derivative
from .modeling.mlp_config import MLPConfig, NetworkSpec
from .optim        import Schedule, adam_step, lbfgs_minimize
from .integrators  import (TimeGrid, Trajectory, SolverScheme, implicit_step_solve, is_absolutely_stable,
                           lmm_coefficients, lmm_integrate, parse_scheme, rkf45_integrate, stability_boundary)
from .problems     import fn_rhs, get_problem, heat_exact, heat_mol_rhs, lorenz_rhs, reference_solution
from .datasets.observations import finite_diff_rhs, synthesize_observations, test_points
from .criterion    import LossBreakdown, discovery_loss
from .trainer      import finetune, finetune_without_pretrain, pretrain, train_discovery
from .metrics      import compute_mse, relative_error
from .plotting     import emit_plot
from .experiment   import run_experiment
