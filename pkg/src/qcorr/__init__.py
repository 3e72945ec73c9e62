"""Quantum correlations beyond entanglement for finite-dimensional bipartite states."""

from .errors import (
    HermiticityError,
    InvalidParameterError,
    InvalidShapeError,
    NumericalError,
    PositivityError,
    PurityError,
    QcorrError,
    TraceError,
)
from .states import BipartiteState, ProbabilityTable, PureState, make_state, preset
from .info import (
    classical_J,
    classical_mutual_information,
    entropy_of_entanglement,
    quantum_mutual_information,
    relative_entropy,
    shannon,
    von_neumann,
)
from .optimize import OptimizerConfig, optimize_over_bases
from .discord import (
    MeasureReport,
    MeasurementBasis,
    classical_correlations,
    conditional_gain,
    detect_classical,
    measure_local,
    quantum_discord,
    relative_entropy_of_discord,
)
from .metrology import LocalObservable, interferometric_power, interferometric_power_qubit, qfi
from .operational import (
    BroadcastChannel,
    activation_measure,
    broadcast_loss,
    broadcast_optimal_loss,
    cnot_d,
    negativity,
    premeasurement,
)

__version__ = "0.1.0"
