"""CHIM inter-WBAN interference mitigation: Latin-rectangle schedules, a
slot-level simulator with a ZIGBEE GTS baseline, and the closed-form model."""
from .errors import (ChimError, ConfigError, ConstructionUnsupported, DimensionError,
                     DomainError, MalformedRectangle, ScheduleMismatch)
from .latin import (LatinRectangle, LatinSquare, OrthogonalFamily, SymbolAssignment,
                    are_orthogonal, assign_symbols, build_mols, family_for, is_latin,
                    join, next_prime, truncate)
from .schedule import (SuperframeLayout, WbanSchedule, ZigbeeGtsSchedule, chim_setup,
                       grant_gts, zigbee_setup)
from .simcore import (EnergyModel, NetworkModel, RunMetrics, RunResult, TransmissionLog,
                      resolve_slot, run_chim, run_zigbee)
from .analysis import (AnalysisParams, expected_w, marginal_collision_probability,
                       mc_oracle, pr_t_imb, pr_t_imb_expanded, pr_x, pr_y_given_x, q_coll)
from .config import ExperimentConfig, load_config, parse_config
from .sweep import run_sweep

__version__ = "0.1.0"
