"""Deterministic simulation and comparison of sliding-mode controllers on a
two-link planar arm.

The package splits into rigid-body dynamics (``dynamics``), the three torque
laws (``control``), the closed-loop simulator (``sim``), post-processing
(``analysis``), configuration (``config``), serialization (``traceio``),
figures (``plots``), and the command line (``cli``).
"""

from .analysis import (ComparisonTable, EmptyTrace, GridMismatch,
                       LyapunovReport, Metrics, compare, lyapunov_report,
                       tracking_metrics)
from .config import (ConfigError, ParseError, UnitError, UnknownKey,
                     default_scenario, parse_config, parse_config_text,
                     scenario_to_ini)
from .control import (HybridGains, IntegralState, NismcGains, ReachingArg,
                      SmcGains, SwitchConfig, SwitchKind, TrackingError,
                      hnismc_command, hnismc_control, integral_update,
                      nismc_command, nismc_control, nismc_surface, smc_command,
                      smc_control, smc_surface, switch, validate_gains)
from .dynamics import (CoriolisMode, JointState, RobotParams, SingularMass,
                       coriolis_matrix, coriolis_vector, energy,
                       forward_dynamics, gravity_vector, inverse_dynamics,
                       mass_matrix)
from .sim import (ControllerKind, DisturbanceKind, DisturbanceModel,
                  FilterParams, NonFiniteState, ReferenceKind, ReferenceSpec,
                  Scenario, Trace, disturbance, filter_init, filter_step,
                  reference, rk4_step, run_simulation, scenario_fingerprint)
from .traceio import CSV_HEADER, read_trace_csv, write_trace_csv

__version__ = "0.1.0"
