"""Pure states of a finite-dimensional Hilbert space.

A physical state is a ray: ``psi`` and ``lam * psi`` (``lam != 0``) are the
same state.  States are stored normalized, so two representatives of one ray
differ only by a global phase.  The inner product follows the bra-ket
convention ``inner(a, b) = sum(a_i * conj(b_i)) = <b|a>``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InvalidStateError, ZeroVectorError
from .image_space import ImageVector
from .seeding import make_rng

NORM_TOL = 1e-12
# near-ties for the canonical pivot are resolved toward the lowest index
_PIVOT_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class QuantumState:
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)
        if a.size < 1:
            raise InvalidStateError("state must have at least one amplitude")
        if not np.all(np.isfinite(a)):
            raise InvalidStateError("state has non-finite amplitudes")
        norm2 = float(np.vdot(a, a).real)
        if not abs(norm2 - 1.0) <= NORM_TOL:
            raise InvalidStateError(f"state is not normalized (sum |a|^2 = {norm2!r})")

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @classmethod
    def from_vector(cls, x) -> "QuantumState":
        """Normalize any nonzero complex vector to a representative of its ray."""
        x = np.asarray(x, dtype=np.complex128).reshape(-1)
        norm = np.linalg.norm(x)
        if norm == 0.0 or not np.isfinite(norm):
            raise ZeroVectorError("cannot normalize a zero vector")
        return cls(x / norm)

    @classmethod
    def basis(cls, dim: int, index: int) -> "QuantumState":
        e = np.zeros(dim, dtype=np.complex128)
        e[index] = 1.0
        return cls(e)

    def __eq__(self, other):
        if not isinstance(other, QuantumState):
            return NotImplemented
        return np.array_equal(self.amplitudes, other.amplitudes)

    def __len__(self):
        return self.dim

    def with_phase(self, phi: float) -> "QuantumState":
        return QuantumState(np.exp(1j * phi) * self.amplitudes)


def _check_dims(a: QuantumState, b: QuantumState):
    if a.dim != b.dim:
        raise DimensionMismatchError(a.dim, b.dim)


def embed(v: ImageVector) -> QuantumState:
    """Identity embedding of a real unit vector as a state with zero imaginary parts."""
    return QuantumState(v.components.astype(np.complex128))


def inner(a: QuantumState, b: QuantumState) -> complex:
    """``sum(a_i * conj(b_i))``, i.e. ``<b|a>``."""
    _check_dims(a, b)
    return complex(np.vdot(b.amplitudes, a.amplitudes))


def fidelity(a: QuantumState, b: QuantumState) -> float:
    """Transition probability ``|<a|b>|^2``, clipped into [0, 1]."""
    c = inner(a, b)
    return min(1.0, c.real * c.real + c.imag * c.imag)


def ray_equal(a: QuantumState, b: QuantumState, tol: float = 1e-9) -> bool:
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    return 1.0 - fidelity(a, b) <= tol


def canonical_phase(a: QuantumState) -> QuantumState:
    """Representative of ``a``'s ray whose largest amplitude is real and positive.

    Among amplitudes whose modulus is within a relative 1e-12 of the maximum,
    the lowest index is the pivot.  Idempotent.
    """
    amps = a.amplitudes
    mod = np.abs(amps)
    pivot = int(np.flatnonzero(mod >= mod.max() * (1.0 - _PIVOT_RTOL))[0])
    p = amps[pivot]
    if p.imag == 0.0 and p.real > 0.0:
        return a
    out = amps * (np.conj(p) / mod[pivot])
    out[pivot] = mod[pivot]
    # drop negative zeros so serialized forms are stable
    out = out + 0.0
    return QuantumState(out)


def random_state(dim: int, seed) -> QuantumState:
    """Haar-random pure state (normalized complex gaussian vector)."""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    rng = make_rng(seed)
    while True:
        z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        if np.any(z):
            return QuantumState.from_vector(z)


# ---------------------------------------------------------------------------
# serialization


def _clean(xs: np.ndarray) -> list[float]:
    return [float(x) + 0.0 for x in xs]


def state_to_dict(state: QuantumState) -> dict:
    s = canonical_phase(state).amplitudes
    return {"dim": state.dim, "re": _clean(s.real), "im": _clean(s.imag)}


def state_from_dict(d: dict) -> QuantumState:
    try:
        dim = int(d["dim"])
        re = np.asarray(d["re"], dtype=np.float64)
        im = np.asarray(d["im"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidStateError(f"malformed state record: {exc}") from None
    if re.ndim != 1 or re.shape != im.shape or re.size != dim:
        raise InvalidStateError(
            f"state record declares dim {dim} but has {re.size} re / {im.size} im values"
        )
    return QuantumState(re + 1j * im)


def dumps_state(state: QuantumState) -> str:
    return json.dumps(state_to_dict(state))


def loads_state(text: str) -> QuantumState:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidStateError(f"state is not valid JSON: {exc}") from None
    return state_from_dict(d)
