"""Desk-scale verification lab for seedless randomness extraction.

Builds the operators and states of the CHSH-based extraction setting at
small dimension, checks the operator inequalities and trace-distance
security bounds numerically, searches and certifies m-bit extractor
tables, and runs the spot-checking protocols end to end.
"""

__version__ = "0.1.0"

from .bell import (
    BinaryMeasurement,
    RoundDevices,
    ShiftedChshParams,
    bell_state,
    chsh_operator,
    chsh_value,
    devices_from_angles,
    optimal_devices,
    random_projective_devices,
    shifted_chsh_operator,
    verify_tensor_product_inequality,
    verify_operator_inequality,
    werner_state,
)
from .extractor import (
    ExtractorTable,
    WalshCertificate,
    certify,
    search_extractor,
    walsh_deviations,
    xor_table,
)
from .linalg import kron, partial_trace, trace_norm
from .protocol import (
    HonestDeviceModel,
    ProtocolConfig,
    Transcript,
    output_length_mbit,
    output_length_xor,
    run_protocol,
    exact_security_audit,
)
from .quantum import (
    ClassicalQuantumOutput,
    TripartiteState,
    build_rho_ke,
    parity_bound,
    mbit_bound,
    trace_distance_to_ideal,
    verify_bound,
)
from .rates import (
    RateProblem,
    RateSolution,
    extraction_rate,
    extraction_rate_limit,
    min_chsh_curve,
    rate_curves,
    solve,
)
