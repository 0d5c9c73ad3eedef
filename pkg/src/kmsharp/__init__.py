"""Sharp recursive transport bounds for Krasnosel'skii-Mann iterations."""

from .bounds import (CTable, DistanceTable, PropertyReport, build_c_table, build_d_table,
                     check_cd_gap, check_four_point, check_metric, check_monotone,
                     read_table_csv, residual_demands, tables_agree, write_table_csv)
from .chain import (ChainKind, FoxHareChain, SimulationReport, absorption_h, coupling_bound,
                    plan_difference_direct, plan_difference_row, simulate, simulation_report,
                    transition_row)
from .errors import (ConstructionError, DomainError, HorizonError, InfeasibleError, KMError,
                     NumericalError, ParseError, PreconditionError)
from .numeric import NumericMode, format_scalar, parse_scalar, to_float
from .rates import (GammaResult, RatePoint, ThetaDiagnostic, gamma, gamma_sweep, kappa_n,
                    kappa_tilde_integral, kappa_tilde_n, limit_diagnostics, poly_d89, rate_points)
from .schedule import StepSchedule, extend_weights, weight_matrix, weights
from .tightmap import (Orbit, PotentialFamily, build_orbit, build_potentials, pair_index,
                       tight_orbit, verify_isometry)
from .transport import (DualPotentials, TransportPlan, TransportProblem, closed_form_plan,
                        inside_out, plan_cost, simplify_plan, solve_exact, verify_no_crossing)

__version__ = "0.1.0"
