"""Q-learning on unequal-variance bandits, and reward noising that fixes it."""
from .agent import AgentConfig, AgentState, decay_epsilon, init_agent, q_update, select_action, td_error
from .asrn import (AsrnConfig, AsrnFilter, AsrnState, filter_reward, init_asrn, interest_grade,
                   median_interest, update_predictors)
from .bandit import (ArmSpec, EnvSpec, IdentityFilter, broken_armed_bandit, env_preset, fig3_bandit,
                     make_env, sample_reward)
from .experiment import (ExperimentConfig, ExperimentResult, Trace, load_config, preset, run_agent,
                         run_experiment, write_outputs)
from .metrics import (StepRecord, TrapEvent, detect_trap_events, mean_loss_by_choice, right_fraction,
                      trap_duration_stats, var_delta_oracle)
from .rng import NormalParams, RngStream, derive_seed, make_rng, sample_normal

__version__ = "0.1.0"
