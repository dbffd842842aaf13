"""Relativistic bit commitment with weak coherent pulses: simulator and security toolkit."""

from .adversary import CheatKind, CheatStrategy, cheat_bound_check, simulate_multiphoton_attack
from .config import ExperimentConfig, load_config, parse_config
from .photonics import SourceParams, p_detect, p_multi, p_r, sample_rounds
from .protocol import Reason, Transcript, VerifyOutcome, open_and_verify, run_protocol, run_three_agent_variant
from .security import (
    ProtocolParams,
    SecurityReport,
    asymptotic_rhs,
    coin_guess_max,
    eps_chernoff,
    eps_exact,
    eps_finite,
    feasible_region,
    security_report,
)
from .spacetime import SiteLayout, SpacetimeEvent, check_open_window, chord_distance, commitment_duration
from .states import StateFamily, bb84_family, bloch_family, lambda1_of, lambda_table

__version__ = "0.1.0"
