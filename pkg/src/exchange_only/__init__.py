"""Exchange-only CPhase gates for three-spin encoded qubits.

Pulse sequences are built analytically from nested three-pulse blocks and
checked by dense simulation of a six-site Heisenberg chain.
"""

from ._kernels import BACKEND, HAVE_NUMBA
from .angular import (
    Coupled,
    basis_matrix,
    build_state,
    cg_coefficient,
    couple,
    labelings,
    recoupling_matrix,
)
from .geometry import AxisAngle, UnitVector3, rotate_vector, three_rotation_companion
from .nogo import four_spin_nogo_demo
from .pulses import (
    Pulse,
    PulseSequence,
    ScheduleError,
    compose,
    durations,
    dump_schedule,
    exchange_unitary,
    invert_sequence,
    load_schedule,
)
from .synthesis import (
    SynthesisResult,
    U3Solution,
    UnachievableThetaError,
    VariantProfile,
    alt_u5_sequence,
    correction_pulses,
    solve_u3,
    solve_u3_tilde,
    synthesize,
    theta_range,
    u3_sequence,
    u4_sequence,
    u4_tilde_sequence,
    u5_sequence,
)
from .verification import (
    GateReport,
    four_spin_trace_check,
    g_independence_check,
    gate_report,
    makhlin_invariants,
    sector_matrix,
)

__version__ = "0.1.0"
