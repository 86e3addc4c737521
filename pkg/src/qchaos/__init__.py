"""Measurement-conditioned nonlinear qubit maps and their complex dynamics."""

__version__ = "0.1.0"

from .density import (
    DensityMatrix,
    RotationParams,
    build_unitary,
    measurement_probability,
    qubit_step,
    rotate,
    squaring_map,
    tensor_product,
    xor_protocol_oracle,
)
from .dynamics import (
    Classification,
    CycleRecord,
    OrbitRecord,
    angle_doubling_orbit,
    classify_point,
    cycle_multiplier,
    find_attracting_cycles,
    iterate_orbit,
    lyapunov_estimate,
)
from .exceptions import (
    DegenerateMeasurement,
    InvalidDensityMatrix,
    NoCycleFound,
    SingularRotation,
)
from .julia import GridSpec, JuliaSetClassifier, render, to_grayscale, write_pgm
from .pure_map import (
    PureState,
    apply_map,
    coordinate_to_state,
    critical_points,
    param_from_rotation,
    spherical_derivative,
    state_to_coordinate,
)
from .purification import (
    ProtocolParams,
    detect_transient_breakdown,
    fidelity,
    make_initial_rho0,
    make_target,
    run_protocol,
    two_qubit_step,
)
from .sphere import INF, chordal_distance, is_close
