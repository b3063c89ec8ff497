"""Simulated analogue quantum image recognition.

Images are centered and normalized onto the unit sphere, embedded as pure
states, and recognized either by a bank of q-ROM projection filters over a
split beam (:mod:`qrecog.qrom_bank`) or by one projective measurement after
orthogonalization (:mod:`qrecog.ortho_recognizer`).
"""

__version__ = "0.1.0"

from .errors import (
    ConsistencyError,
    DimensionMismatchError,
    ImageParseError,
    InputError,
    LinearDependenceError,
    QRecogError,
    ZeroVectorError,
)
from .hilbert import (
    QuantumState,
    canonical_phase,
    embed,
    fidelity,
    inner,
    random_state,
    ray_equal,
)
from .image_space import (
    ImageVector,
    NoiseSpec,
    RawImage,
    apply_noise,
    center_and_normalize,
    concentration_estimate,
    cosine_similarity,
    euclidean_distance,
    parse_image,
    random_unit_vector,
)
from .ortho_recognizer import (
    OrthoMemory,
    build_memory,
    build_rotation,
    measure_in_basis,
    orthogonalize,
    recognize_single_shot,
)
from .qrom_bank import (
    Filter,
    FilterBank,
    RecognitionResult,
    TrialCounts,
    build_filter,
    filter_pass,
    recognize_argmax,
    run_beam_trials,
    split_intensities,
)
