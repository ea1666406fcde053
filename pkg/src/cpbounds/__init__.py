"""Critical-value bounds for the contact process on Z^d (d >= 3).

Library + CLI covering: torus and displacement-box arithmetic, the simple
random walk's return/hitting probabilities, the family of upper bounds
driven by them, a pathwise-coupled simulation of the contact process and
its weighted linear system, and the pair-correlation ODE whose positive
null vector certifies the bound (2 - gamma_d) / (2 d gamma_d).
"""

from .bounds import (BoundSet, L_value, alpha1, alpha2, beta, bound_set,
                     bound_table, general_upper_bound, lambda_threshold,
                     lower_bound, maximize_L, optimal_ab)
from .errors import (AccuracyError, ConditionError, NumericRangeError,
                     TransienceError)
from .lattice import (DisplacementBox, TorusLattice, box_sites,
                      displacement_offset_table)
from .moment_ode import (GLambdaOperator, KVector, MomentField,
                         MomentTrajectory, build_G, build_K, integrate_F,
                         integrate_reference_expm, null_shift, residual_GK,
                         survival_lower_bound)
from .random_walk import (GammaEstimate, GreenTable, QuadConfig,
                          four_step_closed_form, four_step_return, gamma,
                          gamma_mc, gamma_solver, gamma_table, green_function,
                          green_table, hitting_probability, mc_tail_allowance)
from .sim import (CoupledRun, Estimate, FieldState, ModelParams,
                  MomentEstimate, estimate_moments, estimate_survival,
                  simulate_coupled)

__version__ = "0.1.0"
