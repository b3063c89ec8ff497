"""Classical image space: raw pictures, unit vectors on the sphere, similarity.

A monochrome picture of ``N`` pixels is a point of R^N.  Because scaling all
intensities by a positive constant leaves the picture unchanged, images are
compared as unit vectors on S^(N-1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError, ImageParseError, InputError, ZeroVectorError
from .seeding import make_rng

NORM_TOL = 1e-12

FORMATS = ("pgm_ascii", "pgm_binary", "pgm", "csv")


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RawImage:
    """Monochrome picture with row-major integer intensities in ``[0, maxval]``."""

    width: int
    height: int
    maxval: int
    pixels: np.ndarray = field(repr=False)

    def __post_init__(self):
        px = _readonly(np.array(self.pixels, dtype=np.int64).reshape(-1))
        object.__setattr__(self, "pixels", px)
        if self.width < 1 or self.height < 1:
            raise InputError(f"image size must be positive, got {self.width}x{self.height}")
        if self.maxval < 1:
            raise InputError(f"maxval must be a positive integer, got {self.maxval}")
        if px.size != self.width * self.height:
            raise InputError(
                f"expected {self.width * self.height} pixels, got {px.size}"
            )
        if px.size and (px.min() < 0 or px.max() > self.maxval):
            raise InputError(f"pixel intensity outside [0, {self.maxval}]")

    def __eq__(self, other):
        if not isinstance(other, RawImage):
            return NotImplemented
        return (
            (self.width, self.height, self.maxval) == (other.width, other.height, other.maxval)
            and np.array_equal(self.pixels, other.pixels)
        )

    def as_array(self) -> np.ndarray:
        return self.pixels.reshape(self.height, self.width)


@dataclass(frozen=True, eq=False)
class ImageVector:
    """Real unit vector on S^(dim-1)."""

    components: np.ndarray

    def __post_init__(self):
        c = _readonly(np.array(self.components, dtype=np.float64).reshape(-1))
        object.__setattr__(self, "components", c)
        if c.size < 1:
            raise InputError("image vector must have at least one component")
        norm = float(np.linalg.norm(c))
        if not abs(norm - 1.0) <= NORM_TOL:
            raise InputError(f"image vector is not unit norm (norm = {norm!r})")

    @property
    def dim(self) -> int:
        return self.components.size

    @classmethod
    def from_array(cls, x) -> "ImageVector":
        """Normalize an arbitrary nonzero real vector onto the sphere."""
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        norm = np.linalg.norm(x)
        if norm == 0.0 or not np.isfinite(norm):
            raise ZeroVectorError("cannot normalize a zero vector")
        return cls(x / norm)

    def __eq__(self, other):
        if not isinstance(other, ImageVector):
            return NotImplemented
        return np.array_equal(self.components, other.components)

    def __len__(self):
        return self.dim


@dataclass(frozen=True)
class NoiseSpec:
    """One of the two error models: additive gaussian noise or pixel dropout."""

    kind: str
    sigma: float = 0.0
    dropout_fraction: float = 0.0

    def __post_init__(self):
        if self.kind == "gaussian":
            if not self.sigma >= 0.0 or not math.isfinite(self.sigma):
                raise InputError(f"sigma must be >= 0, got {self.sigma}")
            if self.dropout_fraction != 0.0:
                raise InputError("gaussian noise takes no dropout_fraction")
        elif self.kind == "dropout":
            if not 0.0 <= self.dropout_fraction <= 1.0:
                raise InputError(
                    f"dropout_fraction must be in [0, 1], got {self.dropout_fraction}"
                )
            if self.sigma != 0.0:
                raise InputError("dropout noise takes no sigma")
        else:
            raise InputError(f"unknown noise kind {self.kind!r}")

    @classmethod
    def gaussian(cls, sigma: float) -> "NoiseSpec":
        return cls("gaussian", sigma=float(sigma))

    @classmethod
    def dropout(cls, fraction: float) -> "NoiseSpec":
        return cls("dropout", dropout_fraction=float(fraction))

    @property
    def param(self) -> float:
        return self.sigma if self.kind == "gaussian" else self.dropout_fraction


# ---------------------------------------------------------------------------
# parsing


_WHITESPACE = b" \t\n\r\v\f"


class _PGMReader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def _skip(self):
        d = self.data
        while self.pos < len(d):
            c = d[self.pos : self.pos + 1]
            if c in _WHITESPACE and c:
                self.pos += 1
            elif c == b"#":
                while self.pos < len(d) and d[self.pos] not in b"\r\n":
                    self.pos += 1
            else:
                break

    def token(self, what: str) -> tuple[bytes, int]:
        self._skip()
        start = self.pos
        d = self.data
        while self.pos < len(d) and d[self.pos] not in _WHITESPACE and d[self.pos] != ord("#"):
            self.pos += 1
        if start == self.pos:
            raise ImageParseError(f"truncated payload: missing {what}", start)
        return d[start : self.pos], start

    def integer(self, what: str) -> tuple[int, int]:
        tok, off = self.token(what)
        if not tok.isdigit():
            raise ImageParseError(f"malformed {what} {tok!r}", off)
        return int(tok), off


def _parse_pgm(data: bytes, expect: str | None) -> RawImage:
    r = _PGMReader(data)
    magic, off = r.token("magic number")
    if magic not in (b"P2", b"P5"):
        raise ImageParseError(f"malformed header: bad magic number {magic!r}", off)
    binary = magic == b"P5"
    if expect == "pgm_ascii" and binary or expect == "pgm_binary" and not binary:
        raise ImageParseError(f"malformed header: {magic.decode()} is not {expect}", off)
    width, off = r.integer("width")
    if width < 1:
        raise ImageParseError("malformed header: width must be positive", off)
    height, off = r.integer("height")
    if height < 1:
        raise ImageParseError("malformed header: height must be positive", off)
    maxval, off = r.integer("maxval")
    if not 1 <= maxval <= (255 if binary else 65535):
        raise ImageParseError(f"malformed header: maxval {maxval} out of range", off)
    n = width * height

    if binary:
        # exactly one whitespace byte separates the header from the raster
        start = r.pos + 1
        if r.pos >= len(data) or data[r.pos] not in _WHITESPACE:
            raise ImageParseError("truncated payload: missing raster", r.pos)
        raster = data[start : start + n]
        if len(raster) < n:
            raise ImageParseError(
                f"truncated payload: expected {n} pixel bytes, found {len(raster)}", len(data)
            )
        if len(data) > start + n:
            raise ImageParseError("unexpected trailing data after raster", start + n)
        pixels = np.frombuffer(raster, dtype=np.uint8).astype(np.int64)
        bad = np.flatnonzero(pixels > maxval)
        if bad.size:
            raise ImageParseError(
                f"pixel out of range: {pixels[bad[0]]} > maxval {maxval}", start + int(bad[0])
            )
    else:
        values = []
        for i in range(n):
            r._skip()
            if r.pos >= len(data):
                raise ImageParseError(
                    f"truncated payload: expected {n} pixels, found {i}", len(data)
                )
            v, off = r.integer("pixel")
            if v > maxval:
                raise ImageParseError(f"pixel out of range: {v} > maxval {maxval}", off)
            values.append(v)
        r._skip()
        if r.pos < len(data):
            raise ImageParseError("unexpected trailing data after raster", r.pos)
        pixels = np.array(values, dtype=np.int64)
    return RawImage(width, height, maxval, pixels)


def _parse_csv(data: bytes) -> RawImage:
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError as exc:
        raise ImageParseError("CSV is not ASCII text", exc.start) from None
    rows: list[list[int]] = []
    offset = 0
    for line in text.splitlines(keepends=True):
        body = line.rstrip("\r\n")
        if body.strip():
            row = []
            cell_off = offset
            for cell in body.split(","):
                s = cell.strip()
                if not s or not (s.isdigit() or (s[0] in "+-" and s[1:].isdigit())):
                    raise ImageParseError(f"malformed CSV cell {cell!r}", cell_off)
                v = int(s)
                if v < 0:
                    raise ImageParseError(f"pixel out of range: {v} < 0", cell_off)
                row.append(v)
                cell_off += len(cell) + 1
            if rows and len(row) != len(rows[0]):
                raise ImageParseError(
                    f"ragged CSV: row {len(rows)} has {len(row)} values, expected {len(rows[0])}",
                    offset,
                )
            rows.append(row)
        offset += len(line)
    if not rows:
        raise ImageParseError("truncated payload: empty CSV", 0)
    pixels = np.array(rows, dtype=np.int64)
    return RawImage(pixels.shape[1], pixels.shape[0], max(1, int(pixels.max())), pixels)


def parse_image(data: bytes, format: str = "pgm") -> RawImage:
    """Parse PGM (P2/P5, with comments) or CSV bytes into a :class:`RawImage`.

    ``format`` is one of ``pgm_ascii``, ``pgm_binary``, ``csv``, or ``pgm``
    (accepts either PGM variant).  For CSV, ``maxval`` is the largest pixel.
    Errors carry the byte offset of the fault.
    """
    if format not in FORMATS:
        raise InputError(f"unsupported format {format!r}; expected one of {FORMATS}")
    if isinstance(data, str):
        data = data.encode("ascii")
    if format == "csv":
        return _parse_csv(data)
    return _parse_pgm(data, None if format == "pgm" else format)


def read_image(path, format: str | None = None) -> RawImage:
    """Read an image file; ``format`` defaults from the extension."""
    path = str(path)
    if format is None:
        format = "csv" if path.lower().endswith(".csv") else "pgm"
    with open(path, "rb") as fh:
        return parse_image(fh.read(), format)


def write_pgm(img: RawImage, binary: bool = False) -> bytes:
    header = f"{'P5' if binary else 'P2'}\n{img.width} {img.height}\n{img.maxval}\n"
    if binary:
        if img.maxval > 255:
            raise InputError("binary PGM output supports maxval <= 255 only")
        return header.encode() + img.pixels.astype(np.uint8).tobytes()
    rows = img.as_array()
    body = "\n".join(" ".join(str(int(p)) for p in row) for row in rows)
    return (header + body + "\n").encode()


# ---------------------------------------------------------------------------
# vectors and similarity


def center_and_normalize(img: RawImage | Sequence[float]) -> ImageVector:
    """Subtract half the mean intensity, then project onto the unit sphere.

    ``y_i = x_i - sum(x) / (2N)``, ``z = y / |y|``.  Only half the mean is
    removed, so a constant picture keeps a nonzero (constant) vector.
    """
    x = img.pixels if isinstance(img, RawImage) else np.asarray(img)
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.size == 0:
        raise InputError("empty image")
    y = x - x.sum() / (2 * x.size)
    if not np.any(y):
        raise ZeroVectorError("zero vector after centering")
    return ImageVector.from_array(y)


def _check_dims(a: ImageVector, b: ImageVector):
    if a.dim != b.dim:
        raise DimensionMismatchError(a.dim, b.dim)


def euclidean_distance(a: ImageVector, b: ImageVector) -> float:
    _check_dims(a, b)
    return float(np.linalg.norm(a.components - b.components))


def cosine_similarity(a: ImageVector, b: ImageVector) -> float:
    """Scalar product of two unit vectors, clipped into [-1, 1]."""
    _check_dims(a, b)
    return float(np.clip(a.components @ b.components, -1.0, 1.0))


def random_unit_vector(dim: int, seed) -> ImageVector:
    """Uniform sample from S^(dim-1) via a normalized isotropic gaussian."""
    if dim < 1:
        raise InputError(f"dim must be >= 1, got {dim}")
    rng = make_rng(seed)
    while True:
        g = rng.standard_normal(dim)
        if np.any(g):
            return ImageVector.from_array(g)


def apply_noise(v: ImageVector, spec: NoiseSpec, seed) -> ImageVector:
    """Perturb ``v`` by ``spec`` and renormalize.

    Gaussian noise adds N(0, sigma^2) to every component; dropout zeroes
    ``floor(fraction * N)`` distinct components chosen uniformly.
    """
    rng = make_rng(seed)
    x = np.array(v.components)
    if spec.kind == "gaussian":
        if spec.sigma == 0.0:
            return v
        x = x + spec.sigma * rng.standard_normal(x.size)
    else:
        count = math.floor(spec.dropout_fraction * x.size)
        if count == 0:
            return v
        x[rng.choice(x.size, size=count, replace=False)] = 0.0
    if not np.any(x):
        raise ZeroVectorError("noise removed every component")
    return ImageVector.from_array(x)


def concentration_estimate(dim: int, trials: int, seed, chunk: int = 2048) -> float:
    """Mean of ``|(w, v)|`` over ``trials`` independent uniform pairs on S^(dim-1).

    Scales as ``dim ** -0.5``; for large ``dim`` it approaches
    ``sqrt(2 / (pi * dim))``.
    """
    if dim < 1:
        raise InputError(f"dim must be >= 1, got {dim}")
    if trials < 1:
        raise InputError(f"trials must be >= 1, got {trials}")
    rng = make_rng(seed)
    total = 0.0
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        w = rng.standard_normal((m, dim))
        v = rng.standard_normal((m, dim))
        nw = np.linalg.norm(w, axis=1)
        nv = np.linalg.norm(v, axis=1)
        total += float(np.sum(np.abs(np.einsum("ij,ij->i", w, v)) / (nw * nv)))
        done += m
    return total / trials
