"""Recognition by one projective measurement over an orthogonalized memory.

Stored images are orthonormalized (modified Gram-Schmidt, input order), then
a unitary ``U_r`` rotates them onto the first ``k`` canonical basis vectors.
Measuring ``U_r |chi>`` in the canonical basis yields outcome ``i`` with
probability ``|(U_r chi)_i|^2``; outcomes ``>= k`` mean "no stored image".
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from .errors import (
    CorruptMemoryError,
    DimensionMismatchError,
    InputError,
    InvalidStateError,
    LinearDependenceError,
    NonOrthonormalError,
)
from .hilbert import QuantumState, canonical_phase, fidelity, state_from_dict, state_to_dict
from .qrom_bank import RecognitionResult
from .seeding import make_rng

DEPENDENCE_TOL = 1e-8
COMPLETION_TOL = 1e-8
INVARIANT_TOL = 1e-10


def _project_out(v: np.ndarray, basis: list[np.ndarray]) -> np.ndarray:
    # MGS sweep repeated once: the second sweep removes the rounding left by
    # the first, keeping orthonormality near machine precision
    for _ in range(2):
        for q in basis:
            v = v - np.vdot(q, v) * q
    return v


def orthogonalize(images: Sequence[QuantumState], tol: float = DEPENDENCE_TOL) -> list[QuantumState]:
    """Orthonormalize ``images`` in order; raise on linear dependence.

    Output ``i`` spans the same subspace as inputs ``0..i``.  A residual norm
    below ``tol`` raises :class:`LinearDependenceError` naming the index.
    """
    if not images:
        return []
    n = images[0].dim
    if len(images) > n:
        raise DimensionMismatchError(len(images), n)
    basis: list[np.ndarray] = []
    for i, img in enumerate(images):
        if img.dim != n:
            raise DimensionMismatchError(n, img.dim)
        v = _project_out(np.array(img.amplitudes), basis)
        r = float(np.linalg.norm(v))
        if r < tol:
            raise LinearDependenceError(i, r)
        basis.append(v / r)
    return [QuantumState(q) for q in basis]


def _gram_residual(vectors: np.ndarray) -> float:
    g = vectors.conj() @ vectors.T
    return float(np.max(np.abs(g - np.eye(len(vectors))))) if len(vectors) else 0.0


def build_rotation(ortho_states: Sequence[QuantumState], dim: int) -> np.ndarray:
    """Unitary whose first ``k`` rows send ``ortho_states[i]`` to ``e_i``.

    The remaining rows complete the basis greedily by Gram-Schmidt over
    ``e_0, e_1, ...``, skipping candidates with residual below 1e-8.
    """
    k = len(ortho_states)
    if k > dim:
        raise DimensionMismatchError(k, dim)
    for s in ortho_states:
        if s.dim != dim:
            raise DimensionMismatchError(dim, s.dim)
    cols = [np.array(s.amplitudes) for s in ortho_states]
    if k and _gram_residual(np.array(cols)) > INVARIANT_TOL:
        raise NonOrthonormalError("states are not orthonormal within 1e-10")
    for j in range(dim):
        if len(cols) == dim:
            break
        e = np.zeros(dim, dtype=np.complex128)
        e[j] = 1.0
        v = _project_out(e, cols)
        r = float(np.linalg.norm(v))
        if r > COMPLETION_TOL:
            cols.append(v / r)
    # row i is <psi_i|, so (U psi_j)_i = <psi_i|psi_j> = delta_ij
    return np.array(cols).conj()


@dataclass(frozen=True, eq=False)
class OrthoMemory:
    ortho_states: tuple[QuantumState, ...]
    rotation: np.ndarray = field(repr=False)
    labels: tuple
    originals: tuple[QuantumState, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "ortho_states", tuple(self.ortho_states))
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "originals", tuple(self.originals))
        rot = np.array(self.rotation, dtype=np.complex128)
        rot.setflags(write=False)
        object.__setattr__(self, "rotation", rot)

    @property
    def dim(self) -> int:
        return self.rotation.shape[0]

    @property
    def stored_count(self) -> int:
        return len(self.ortho_states)

    k = stored_count

    def residuals(self) -> dict[str, float]:
        """Worst-case residuals of the three structural invariants."""
        n = self.dim
        states = np.array([s.amplitudes for s in self.ortho_states]).reshape(-1, n)
        u = self.rotation
        mapped = u @ states.T if len(states) else np.zeros((n, 0))
        target = np.eye(n, len(states))
        return {
            "orthonormality": _gram_residual(states),
            "unitarity": float(np.max(np.abs(u.conj().T @ u - np.eye(n)))),
            "mapping": float(np.max(np.abs(mapped - target))) if len(states) else 0.0,
        }

    def validate(self, tol: float = INVARIANT_TOL) -> None:
        n = self.rotation.shape
        if len(n) != 2 or n[0] != n[1]:
            raise CorruptMemoryError(f"rotation must be square, got shape {n}")
        if self.stored_count > self.dim:
            raise CorruptMemoryError("more stored states than dimensions")
        if len(self.labels) != self.stored_count:
            raise CorruptMemoryError("label count does not match stored count")
        for s in self.ortho_states + self.originals:
            if s.dim != self.dim:
                raise CorruptMemoryError(f"stored state of dim {s.dim} in a dim {self.dim} memory")
        if self.originals and len(self.originals) != self.stored_count:
            raise CorruptMemoryError("original count does not match stored count")
        bad = {name: r for name, r in self.residuals().items() if not r <= tol}
        if bad:
            raise CorruptMemoryError(
                "memory invariants violated: "
                + ", ".join(f"{name} residual {r:.3g}" for name, r in bad.items())
            )

    def distortion(self) -> list[float]:
        """Fidelity between each original image and its orthogonalized form."""
        return [fidelity(o, s) for o, s in zip(self.originals, self.ortho_states)]


def build_memory(
    images: Sequence[QuantumState],
    labels: Sequence[Hashable] | None = None,
    tol: float = DEPENDENCE_TOL,
) -> OrthoMemory:
    if not images:
        raise InputError("cannot build a memory from zero images")
    if labels is None:
        labels = list(range(len(images)))
    if len(labels) != len(images):
        raise InputError(f"{len(images)} images but {len(labels)} labels")
    # canonical phases keep serialized states identical to the in-memory ones
    ortho = [canonical_phase(s) for s in orthogonalize(images, tol)]
    rot = build_rotation(ortho, images[0].dim)
    mem = OrthoMemory(tuple(ortho), rot, tuple(labels), tuple(images))
    mem.validate()
    return mem


def outcome_probabilities(state: QuantumState, memory: OrthoMemory) -> np.ndarray:
    """Born probabilities ``|(U_r chi)_i|^2`` for all ``n`` outcomes."""
    if state.dim != memory.dim:
        raise DimensionMismatchError(memory.dim, state.dim)
    phi = memory.rotation @ state.amplitudes
    return phi.real**2 + phi.imag**2


def measure_in_basis(state: QuantumState, memory: OrthoMemory, rng) -> int:
    p = outcome_probabilities(state, memory)
    cdf = np.cumsum(p)
    u = make_rng(rng).random() * cdf[-1]
    return int(min(np.searchsorted(cdf, u, side="right"), len(p) - 1))


def recognize_single_shot(memory: OrthoMemory, state: QuantumState, rng) -> RecognitionResult:
    """One projective measurement.

    An outcome ``i < k`` is accepted as stored image ``i``; the reported
    score is the exact outcome probability, which a physical device would
    not reveal (simulator-only diagnostic).  Outcomes ``>= k`` reject.
    """
    p = outcome_probabilities(state, memory)
    i = measure_in_basis(state, memory, rng)
    k = memory.stored_count
    if i < k:
        return RecognitionResult(i, float(min(1.0, p[i])), None, True, memory.labels[i], "ortho")
    return RecognitionResult(None, float(min(1.0, p[i])), None, False, None, "ortho")


# ---------------------------------------------------------------------------
# persistence


def _matrix(m: np.ndarray) -> dict:
    return {
        "re": [[float(x) + 0.0 for x in row] for row in m.real],
        "im": [[float(x) + 0.0 for x in row] for row in m.imag],
    }


def memory_to_dict(memory: OrthoMemory) -> dict:
    d = {
        "dim": memory.dim,
        "k": memory.stored_count,
        "labels": list(memory.labels),
        "ortho_states": [state_to_dict(s) for s in memory.ortho_states],
        "rotation": _matrix(memory.rotation),
    }
    if memory.originals:
        d["originals"] = [state_to_dict(s) for s in memory.originals]
    return d


def memory_from_dict(d: dict) -> OrthoMemory:
    try:
        dim, k = int(d["dim"]), int(d["k"])
        states = tuple(state_from_dict(s) for s in d["ortho_states"])
        originals = tuple(state_from_dict(s) for s in d.get("originals", ()))
        rot = np.asarray(d["rotation"]["re"], dtype=np.float64) + 1j * np.asarray(
            d["rotation"]["im"], dtype=np.float64
        )
        labels = tuple(d["labels"])
    except (KeyError, TypeError, ValueError, InvalidStateError) as exc:
        raise CorruptMemoryError(f"malformed memory record: {exc}") from None
    if rot.shape != (dim, dim):
        raise CorruptMemoryError(f"rotation shape {rot.shape} does not match dim {dim}")
    if len(states) != k:
        raise CorruptMemoryError(f"record declares k={k} but holds {len(states)} states")
    mem = OrthoMemory(states, rot, labels, originals)
    mem.validate()
    return mem


def dumps_memory(memory: OrthoMemory) -> str:
    return json.dumps(memory_to_dict(memory), indent=1) + "\n"
