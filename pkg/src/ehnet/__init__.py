"""Slot-based simulator for communication links powered by harvested energy.

The package compares networks whose transmitters draw power from a battery
fed by a random harvest against the classical systems with an average power
constraint, policy by policy: as runs grow longer and batteries larger, the
battery-limited performance approaches the unconstrained one.

Modules: `battery` (the energy buffer), `stochastic` (seeded draws and
quadrature), `policies` (power schedules and the budget solver),
`utilities` (per-slot link qualities), `simulator` (the slot loop),
`experiments` (bundled sweeps and CSV output), `cli` (command line).
"""

from .battery import BatteryState, Regime, classify_regime
from .policies import (
    AlternatingRelayPolicy,
    AmplifierModel,
    ConstantPolicy,
    MaxGainBroadcastPolicy,
    WaterfillPolicy,
    solve_lambda,
)
from .simulator import (
    LinkSpec,
    SimulationConfig,
    TransmitterSpec,
    paired_gap,
    run_eh,
    run_non_eh,
)
from .stochastic import ConstantProcess, ExponentialProcess
from .utilities import (
    AmplifierRateUtility,
    BroadcastSumRateUtility,
    ChainRateUtility,
    Direction,
    MacBpskBerUtility,
    OutageUtility,
)

__version__ = "0.1.0"

__all__ = [
    "AlternatingRelayPolicy",
    "AmplifierModel",
    "AmplifierRateUtility",
    "BatteryState",
    "BroadcastSumRateUtility",
    "ChainRateUtility",
    "ConstantPolicy",
    "ConstantProcess",
    "Direction",
    "ExponentialProcess",
    "LinkSpec",
    "MacBpskBerUtility",
    "MaxGainBroadcastPolicy",
    "OutageUtility",
    "Regime",
    "SimulationConfig",
    "TransmitterSpec",
    "WaterfillPolicy",
    "classify_regime",
    "paired_gap",
    "run_eh",
    "run_non_eh",
    "solve_lambda",
    "__version__",
]
