"""Truth tables, exact circuit search, NW generators, reconstruction, learner
conversions, natural-property transforms, the function-versus-probe game and
the self-reducibility bootstrap."""

from .truthtable import TruthTable
from .circuits import Circuit, exact_mcsp, enumerate_functions, parse_basis
from .designs import Design, poly_design, select_design
from .errors import (ArgumentError, BootstrapFailure, CapacityError, ContractFailure,
                     ReconstructionFailure, StatisticalFailure, StructuralError)

__version__ = "0.1.0"
