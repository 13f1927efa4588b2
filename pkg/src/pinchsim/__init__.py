"""Two-timescale transmit and pinching beamforming simulator.

Core pipeline: LoS channels through waveguide-fed movable elements, per-
realization transmit beamforming (WMMSE, RZF, structured duals), analytic
position gradients, and a stochastic surrogate loop optimizing element
positions under ordered-spacing constraints.  A FastAPI service and a thin
CLI wrap the library for experiment runs, dataset export and duals scoring.
"""

from .baselines import UlaConfig, mimo_baseline, ssca_thp_run, ula_channel
from .channel import (ChannelSample, PinchingLayout, channel_matrix, draw_users,
                      effective_channel, user_channel, waveguide_response)
from .checks import gradient_check, projection_check
from .config import SystemConfig, dbm_to_watts, watts_to_dbm
from .experiments import (ExperimentSpec, ResultRow, eval_duals, export_training_set,
                          parse_experiment_config, rows_to_csv, run_experiment)
from .gradients import grad_fd_oracle, grad_x_fixed_w, neg_sum_rate, total_grad_term
from .isotonic import isotonic_l2, project_layout, project_row
from .longterm import (DEFAULT_TAU, StepSchedule, SurrogateState, default_schedule,
                       run_long_term, smooth_update, solve_subproblem, update_surrogate)
from .precoding import (DualParams, KktFitResult, WmmseState, kkt_fit, kkt_reconstruct,
                        mrt_equal_power, rescale_to_power, rzf_precoder, wmmse_solve)
from .rates import (RateReport, check_power, mmse_receiver, mse_terms, sinr_and_rate,
                    sum_rate, total_power, wmmse_objective)

__version__ = "0.1.0"
