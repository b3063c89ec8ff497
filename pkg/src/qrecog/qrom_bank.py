"""Beam-splitter bank of q-ROM filters.

A q-ROM filter for one image projects onto the stored ray: an input state
passes with probability equal to its fidelity with the stored state and
leaves as the stored state.  A classical input can be prepared as many times
as needed, so the beam is split equally over ``n`` arms, one filter per arm,
and the arm with the largest transmitted intensity names the recognized
image.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .errors import DimensionMismatchError, InputError
from .hilbert import (
    QuantumState,
    canonical_phase,
    fidelity,
    state_from_dict,
    state_to_dict,
)
from .seeding import make_rng

DEFAULT_EPSILON = 0.1
DEFAULT_SHOTS = 1000


@dataclass(frozen=True)
class Filter:
    stored: QuantumState
    label: Hashable = None

    @property
    def dim(self) -> int:
        return self.stored.dim


@dataclass(frozen=True)
class FilterBank:
    filters: tuple[Filter, ...]
    input_intensity: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "filters", tuple(self.filters))
        if not self.filters:
            raise InputError("a filter bank needs at least one filter")
        if not self.input_intensity > 0:
            raise InputError(f"input intensity must be positive, got {self.input_intensity}")
        d = self.filters[0].dim
        for f in self.filters[1:]:
            if f.dim != d:
                raise DimensionMismatchError(d, f.dim)

    def __len__(self):
        return len(self.filters)

    @property
    def dim(self) -> int:
        return self.filters[0].dim

    @property
    def labels(self) -> list:
        return [f.label for f in self.filters]

    @classmethod
    def from_states(cls, states: Sequence[QuantumState], labels=None, input_intensity=1.0):
        if labels is None:
            labels = list(range(len(states)))
        if len(labels) != len(states):
            raise InputError(f"{len(states)} states but {len(labels)} labels")
        return cls(
            tuple(build_filter(s, lab) for s, lab in zip(states, labels)),
            input_intensity,
        )


@dataclass(frozen=True)
class TrialCounts:
    shots_per_arm: int
    accepts: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "accepts", tuple(int(a) for a in self.accepts))
        if self.shots_per_arm < 1:
            raise InputError("shots_per_arm must be >= 1")
        if any(a < 0 or a > self.shots_per_arm for a in self.accepts):
            raise InputError("accept counts must lie in [0, shots_per_arm]")

    @property
    def rates(self) -> np.ndarray:
        return np.asarray(self.accepts, dtype=np.float64) / self.shots_per_arm


@dataclass(frozen=True)
class RecognitionResult:
    """Outcome of one recognition.

    ``score`` is probability-level (a fidelity or fidelity estimate) for
    both recognizers.  ``epsilon`` is None when no threshold was applied
    (single-shot projective measurement accepts any stored outcome).
    """

    best_index: int | None
    score: float
    epsilon: float | None
    accepted: bool
    label: Hashable = None
    method: str = "beam"
    score_kind: str = "fidelity"

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "best_index": self.best_index,
            "label": self.label,
            "score": self.score,
            "score_kind": self.score_kind,
            "epsilon": self.epsilon,
            "accepted": self.accepted,
        }


def build_filter(image: QuantumState, label: Hashable = None) -> Filter:
    return Filter(canonical_phase(image), label)


def _check(bank_dim: int, state: QuantumState):
    if bank_dim != state.dim:
        raise DimensionMismatchError(bank_dim, state.dim)


def filter_pass(f: Filter, state: QuantumState, rng: np.random.Generator) -> QuantumState | None:
    """Send one particle through ``f``.

    Returns the stored state on transmission (projection followed by
    renormalization lands exactly on the stored ray) or None when the
    particle is absorbed.
    """
    _check(f.dim, state)
    p = fidelity(f.stored, state)
    return f.stored if rng.random() < p else None


def split_intensities(bank: FilterBank, state: QuantumState) -> np.ndarray:
    """Exact transmitted intensity ``I_k = |<iota_k|chi>|^2 * I0 / n`` per arm."""
    _check(bank.dim, state)
    share = bank.input_intensity / len(bank)
    return np.array([fidelity(f.stored, state) * share for f in bank.filters])


def _arm_accepts(bank: FilterBank, state: QuantumState, arm: int, shots: int, seed) -> int:
    p = fidelity(bank.filters[arm].stored, state)
    return int(make_rng(seed, arm).binomial(shots, p))


def run_beam_trials(
    bank: FilterBank,
    state: QuantumState,
    shots_per_arm: int = DEFAULT_SHOTS,
    seed: int = 0,
    workers: int = 1,
) -> TrialCounts:
    """Sample transmitted-particle counts for every arm.

    Arm ``k`` draws ``Binomial(shots_per_arm, fidelity_k)`` from its own
    sub-stream keyed by ``(seed, k)``, so results do not depend on the order
    or concurrency with which arms are evaluated.
    """
    _check(bank.dim, state)
    if shots_per_arm < 1:
        raise InputError(f"shots_per_arm must be >= 1, got {shots_per_arm}")
    arms = range(len(bank))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            accepts = list(
                pool.map(lambda k: _arm_accepts(bank, state, k, shots_per_arm, seed), arms)
            )
    else:
        accepts = [_arm_accepts(bank, state, k, shots_per_arm, seed) for k in arms]
    return TrialCounts(shots_per_arm, tuple(accepts))


def intensity_rates(intensities: Sequence[float], input_intensity: float) -> np.ndarray:
    """Convert arm intensities back to fidelity estimates ``I_k * n / I0``."""
    x = np.asarray(intensities, dtype=np.float64)
    return x * len(x) / input_intensity


def recognize_argmax(
    values: TrialCounts | Sequence[float],
    epsilon: float = DEFAULT_EPSILON,
    *,
    input_intensity: float | None = None,
    labels: Sequence | None = None,
) -> RecognitionResult:
    """Pick the arm with the largest normalized rate.

    ``values`` is a :class:`TrialCounts`, a sequence of exact intensities
    (pass ``input_intensity``), or a sequence of rates already on the
    fidelity scale.  Ties go to the lowest index.  Accepted iff the winning
    rate exceeds ``1 - epsilon``.
    """
    if not 0.0 < epsilon < 1.0:
        raise InputError(f"epsilon must be in (0, 1), got {epsilon}")
    if isinstance(values, TrialCounts):
        rates = values.rates
    elif input_intensity is not None:
        rates = intensity_rates(values, input_intensity)
    else:
        rates = np.asarray(values, dtype=np.float64)
    if rates.size == 0:
        raise InputError("cannot recognize from an empty set of arms")
    best = int(np.argmax(rates))  # first maximum wins ties
    score = float(min(1.0, max(0.0, rates[best])))
    label = labels[best] if labels is not None else None
    return RecognitionResult(best, score, epsilon, score > 1.0 - epsilon, label)


def recognize_beam(
    bank: FilterBank,
    state: QuantumState,
    shots_per_arm: int = DEFAULT_SHOTS,
    epsilon: float = DEFAULT_EPSILON,
    seed: int = 0,
) -> tuple[RecognitionResult, TrialCounts]:
    counts = run_beam_trials(bank, state, shots_per_arm, seed)
    return recognize_argmax(counts, epsilon, labels=bank.labels), counts


# ---------------------------------------------------------------------------
# persistence


def bank_to_dict(bank: FilterBank) -> dict:
    return {
        "intensity": bank.input_intensity,
        "filters": [{"label": f.label, "state": state_to_dict(f.stored)} for f in bank.filters],
    }


def bank_from_dict(d: dict) -> FilterBank:
    try:
        filters = tuple(
            Filter(state_from_dict(f["state"]), f["label"]) for f in d["filters"]
        )
        return FilterBank(filters, float(d["intensity"]))
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed filter bank record: {exc}") from None


def dumps_bank(bank: FilterBank) -> str:
    return json.dumps(bank_to_dict(bank), indent=1) + "\n"


def counts_to_csv(counts: TrialCounts, labels: Sequence | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["arm", "label", "accepts", "shots", "rate"])
    for k, a in enumerate(counts.accepts):
        lab = labels[k] if labels is not None else k
        w.writerow([k, lab, a, counts.shots_per_arm, repr(a / counts.shots_per_arm)])
    return buf.getvalue()
