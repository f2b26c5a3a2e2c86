"""DC optimal transmission switching with shortest-path big-M bounds."""

from .bounds import (BoundSet, LineBounds, Provenance, exact_bounds, exact_m_opt,
                     mccormick_from_bigm, naive_bounds, strengthen_bounds)
from .caseio import (CaseDocument, FlexibleSpec, SourceFormat, load_bundled, parse_matpower,
                     parse_native, read_case, write_native)
from .errors import (CostKindMismatch, EmptyRestriction, IncompleteBounds, InvalidArgument,
                     IslandingError, MissingRating, NumericalError, OTSError, ParseError,
                     QuadraticNotRepresentable, TooLarge, UnsupportedCost, UnsupportedLine)
from .formulation import CostMode, VariableMap, build_bigm, build_mccormick, default_cost_mode
from .graph import build_fixed_subgraph, components, is_spanning_connected, shortest_paths
from .model import MipModel, relax
from .mps import EpigraphStrategy, read_mps, write_mps
from .network import Bus, CostFunction, CostKind, Generator, Line, Network, scale_loads, validate
from .oracle import enumerate_solve, max_angle_difference
from .solver import Solution, SolverConfig, Status, relative_gap, solve_lp, solve_mip

__version__ = "0.1.0"
