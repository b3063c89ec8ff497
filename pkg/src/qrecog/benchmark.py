"""Seeded recognition benchmarks.

A benchmark draws ``image_count`` random images, stores them in a beam bank
and/or an orthogonal memory, then for every (recognizer, noise level) cell
runs ``trials`` noisy-query recognitions and the same number of random-input
recognitions.  Every random stream is derived from the master seed by a
fixed key path (see the ``KEY_*`` constants), so any cell can be recomputed
alone and cells may be evaluated in any order or concurrently.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigError, InputError
from .hilbert import QuantumState, embed
from .image_space import (
    ImageVector,
    NoiseSpec,
    apply_noise,
    concentration_estimate,
    random_unit_vector,
)
from .ortho_recognizer import OrthoMemory, build_memory, recognize_single_shot
from .qrom_bank import FilterBank, recognize_argmax, run_beam_trials
from .seeding import derive_seed

RECOGNIZERS = ("beam", "ortho")

# seed key paths under the master seed
KEY_IMAGE = 0  # (KEY_IMAGE, image)
KEY_NOISE = 1  # (KEY_NOISE, noise_index, trial)
KEY_RECOGNIZE = 2  # (KEY_RECOGNIZE, recognizer_index, noise_index, trial)
KEY_RANDOM_INPUT = 3  # (KEY_RANDOM_INPUT, noise_index, trial)
KEY_RANDOM_RECOGNIZE = 4  # (KEY_RANDOM_RECOGNIZE, recognizer_index, noise_index, trial)
KEY_CONCENTRATION = 5  # (KEY_CONCENTRATION, dim)

CSV_HEADER = [
    "recognizer",
    "noise_kind",
    "noise_param",
    "trials",
    "correct_rate",
    "false_accept_rate",
    "mean_score",
    "seconds",
]


@dataclass(frozen=True)
class BenchmarkConfig:
    dim: int
    image_count: int
    noise: tuple[NoiseSpec, ...]
    shots_per_arm: int = 1000
    trials: int = 200
    epsilon: float = 0.1
    seed: int = 0
    recognizer: str = "both"
    concentration_dims: tuple[int, ...] = (64, 256, 1024)
    concentration_trials: int = 10_000

    @property
    def recognizers(self) -> tuple[str, ...]:
        return RECOGNIZERS if self.recognizer == "both" else (self.recognizer,)

    @classmethod
    def from_dict(cls, d: dict) -> "BenchmarkConfig":
        """Validate a JSON config, collecting every problem before raising."""
        if not isinstance(d, dict):
            raise ConfigError(["config must be a JSON object"])
        problems = []
        known = {f for f in cls.__dataclass_fields__}
        for key in d:
            if key not in known:
                problems.append(f"{key}: unknown field")

        def integer(name, minimum, default=None):
            v = d.get(name, default)
            if v is None:
                problems.append(f"{name}: required")
            elif isinstance(v, bool) or not isinstance(v, int):
                problems.append(f"{name}: must be an integer, got {v!r}")
            elif v < minimum:
                problems.append(f"{name}: must be >= {minimum}, got {v}")
            else:
                return v
            return None

        dim = integer("dim", 1)
        count = integer("image_count", 1)
        shots = integer("shots_per_arm", 1, 1000)
        trials = integer("trials", 1, 200)
        seed = integer("seed", 0, 0)
        ctrials = integer("concentration_trials", 1, 10_000)

        eps = d.get("epsilon", 0.1)
        if isinstance(eps, bool) or not isinstance(eps, (int, float)) or not 0 < eps < 1:
            problems.append(f"epsilon: must be a number in (0, 1), got {eps!r}")
            eps = None

        rec = d.get("recognizer", "both")
        if rec not in ("beam", "ortho", "both"):
            problems.append(f"recognizer: must be one of beam, ortho, both; got {rec!r}")
            rec = None

        noise = []
        raw_noise = d.get("noise")
        if not isinstance(raw_noise, list) or not raw_noise:
            problems.append("noise: must be a non-empty list of noise specs")
        else:
            for i, spec in enumerate(raw_noise):
                try:
                    if not isinstance(spec, dict):
                        raise InputError("must be an object")
                    noise.append(
                        NoiseSpec(
                            spec.get("kind"),
                            float(spec.get("sigma", 0.0)),
                            float(spec.get("dropout_fraction", 0.0)),
                        )
                    )
                except (InputError, TypeError, ValueError) as exc:
                    problems.append(f"noise[{i}]: {exc}")

        cdims = d.get("concentration_dims", [64, 256, 1024])
        if not isinstance(cdims, list) or not all(
            isinstance(x, int) and not isinstance(x, bool) and x >= 1 for x in cdims
        ):
            problems.append(f"concentration_dims: must be a list of positive integers, got {cdims!r}")
            cdims = None

        if dim is not None and count is not None and rec in ("ortho", "both") and count > dim:
            problems.append(
                f"image_count: {count} exceeds dim {dim}, not allowed with the ortho recognizer"
            )
        if problems:
            raise ConfigError(problems)
        return cls(
            dim=dim,
            image_count=count,
            noise=tuple(noise),
            shots_per_arm=shots,
            trials=trials,
            epsilon=float(eps),
            seed=seed,
            recognizer=rec,
            concentration_dims=tuple(cdims),
            concentration_trials=ctrials,
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["noise"] = [
            {"kind": n.kind, "sigma": n.sigma}
            if n.kind == "gaussian"
            else {"kind": n.kind, "dropout_fraction": n.dropout_fraction}
            for n in self.noise
        ]
        d["concentration_dims"] = list(self.concentration_dims)
        return d


@dataclass(frozen=True)
class StoredSet:
    """Images shared by every cell of one benchmark."""

    originals: tuple[QuantumState, ...]
    bank: FilterBank | None
    memory: OrthoMemory | None

    def targets(self, recognizer: str) -> tuple[QuantumState, ...]:
        # each recognizer is queried with the states it actually stores
        if recognizer == "ortho":
            return self.memory.ortho_states
        return self.originals


@dataclass
class CellResult:
    recognizer: str
    noise_kind: str
    noise_param: float
    trials: int
    correct_rate: float
    false_accept_rate: float
    mean_score: float
    seconds: float = 0.0

    def row(self) -> list:
        return [
            self.recognizer,
            self.noise_kind,
            repr(self.noise_param),
            self.trials,
            repr(self.correct_rate),
            repr(self.false_accept_rate),
            repr(self.mean_score),
            repr(self.seconds),
        ]


@dataclass
class BenchmarkReport:
    config: BenchmarkConfig
    cells: list[CellResult]
    concentration: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "cells": [asdict(c) for c in self.cells],
            "concentration": self.concentration,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for c in self.cells:
            w.writerow(c.row())
        return buf.getvalue()

    def concentration_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["dim", "trials", "mean_abs_inner", "scaled_by_sqrt_dim", "gaussian_limit"])
        for r in self.concentration:
            w.writerow(
                [r["dim"], r["trials"], repr(r["mean_abs_inner"]),
                 repr(r["scaled_by_sqrt_dim"]), repr(r["gaussian_limit"])]
            )
        return buf.getvalue()


def stored_images(config: BenchmarkConfig) -> list[QuantumState]:
    return [
        embed(random_unit_vector(config.dim, derive_seed(config.seed, KEY_IMAGE, i)))
        for i in range(config.image_count)
    ]


def prepare(config: BenchmarkConfig) -> StoredSet:
    images = stored_images(config)
    recs = config.recognizers
    bank = FilterBank.from_states(images) if "beam" in recs else None
    memory = build_memory(images) if "ortho" in recs else None
    return StoredSet(tuple(images), bank, memory)


def _as_image(state: QuantumState) -> ImageVector:
    # benchmark images are real; orthogonalization keeps them real
    return ImageVector(state.amplitudes.real)


def recognize_once(stored: StoredSet, recognizer: str, query: QuantumState, config, seed: int):
    if recognizer == "beam":
        counts = run_beam_trials(stored.bank, query, config.shots_per_arm, seed)
        return recognize_argmax(counts, config.epsilon)
    return recognize_single_shot(stored.memory, query, seed)


def run_cell(
    config: BenchmarkConfig, stored: StoredSet, recognizer: str, noise_index: int, timing: bool = False
) -> CellResult:
    start = time.perf_counter()
    r_idx = RECOGNIZERS.index(recognizer)
    spec = config.noise[noise_index]
    targets = stored.targets(recognizer)
    m = len(targets)
    correct = 0
    false_accepts = 0
    scores = []
    for t in range(config.trials):
        target = t % m
        noisy = apply_noise(
            _as_image(targets[target]), spec, derive_seed(config.seed, KEY_NOISE, noise_index, t)
        )
        res = recognize_once(
            stored, recognizer, embed(noisy), config,
            derive_seed(config.seed, KEY_RECOGNIZE, r_idx, noise_index, t),
        )
        correct += res.accepted and res.best_index == target
        scores.append(res.score)

        probe = embed(
            random_unit_vector(config.dim, derive_seed(config.seed, KEY_RANDOM_INPUT, noise_index, t))
        )
        res = recognize_once(
            stored, recognizer, probe, config,
            derive_seed(config.seed, KEY_RANDOM_RECOGNIZE, r_idx, noise_index, t),
        )
        false_accepts += res.accepted
    seconds = time.perf_counter() - start if timing else 0.0
    return CellResult(
        recognizer,
        spec.kind,
        spec.param,
        config.trials,
        correct / config.trials,
        false_accepts / config.trials,
        float(np.mean(scores)),
        seconds,
    )


def cells(config: BenchmarkConfig) -> list[tuple[str, int]]:
    """Canonical (recognizer, noise index) order of report rows."""
    return [(r, j) for r in config.recognizers for j in range(len(config.noise))]


def concentration_table(config: BenchmarkConfig) -> list[dict]:
    rows = []
    for dim in config.concentration_dims:
        est = concentration_estimate(
            dim, config.concentration_trials, derive_seed(config.seed, KEY_CONCENTRATION, dim)
        )
        rows.append(
            {
                "dim": dim,
                "trials": config.concentration_trials,
                "mean_abs_inner": est,
                "scaled_by_sqrt_dim": est * math.sqrt(dim),
                "gaussian_limit": math.sqrt(2.0 / (math.pi * dim)),
            }
        )
    return rows


def run_benchmark(
    config: BenchmarkConfig, workers: int = 1, timing: bool = False, order=None
) -> BenchmarkReport:
    """Run every cell and the concentration table.

    ``order`` optionally permutes cell evaluation; rows are always reported
    in canonical order.
    """
    stored = prepare(config)
    todo = cells(config)
    seq = [todo[i] for i in order] if order is not None else list(todo)
    if sorted(seq) != sorted(todo):
        raise ValueError("order must be a permutation of the benchmark cells")

    def job(cell):
        return cell, run_cell(config, stored, cell[0], cell[1], timing)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            done = dict(pool.map(job, seq))
    else:
        done = dict(job(c) for c in seq)
    return BenchmarkReport(config, [done[c] for c in todo], concentration_table(config))
