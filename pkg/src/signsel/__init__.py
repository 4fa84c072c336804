"""Sign selection for OFDM peak reduction by the method of conditional expectations."""

from .baselines import exhaustive_min, slm
from .bounds import papr_upper_bound, srcm_upper_bound
from .engine import (CeConfig, Rule, initial_expectation, select_signs, select_signs_cf_estimator,
                     select_signs_exact, select_signs_se, select_signs_srcm)
from .harness import SimConfig, run_experiment
from .metrics import crest_factor, log_sum_exp_metric, papr, srcm
from .ofdm import SignalParams, build_constellation, draw_symbols, modulate

__version__ = "0.1.0"
