"""Location token codec: continuous corners <-> discrete grid-cell tokens.

A corner (x0, y0) inside a width x height image falls into location bin
(floor(x0 / width * w_bins), floor(y0 / height * h_bins)), flattened row-major
to index ``y_bin * w_bins + x_bin``. Coordinates exactly on the far image edge
clamp into the last row/column instead of indexing out of range, so boxes that
touch the edge (e.g. after flipping) stay encodable. Decoding returns the
center of a bin, so a round trip moves a corner by at most half a bin per axis.

Also builds the sine-cosine embedding table used to initialize the token
vocabulary of a downstream text encoder, and reads/writes it as a small binary
file ("GEOE" format) with a JSON sidecar.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (
    BinaryFormatError,
    CoordinateRangeError,
    TokenParseError,
    TokenRangeError,
)
from .layout import AnnotatedBox, GridSpec, LocationToken

#: Lexical pattern for rendering token indices; indices are zero-based.
DEFAULT_TOKEN_TEMPLATE = "<L_{i}>"

#: Frequency base of the sinusoidal embedding, the conventional constant.
SINCOS_TEMPERATURE = 10000.0

#: Magic bytes and header layout of the embedding export format.
EMBED_MAGIC = b"GEOE"
_EMBED_HEADER = struct.Struct("<4sII")


def _axis_bin(value: float, extent: float, bins: int, axis: str) -> int:
    if not (0.0 <= value <= extent):
        raise CoordinateRangeError(
            f"{axis} coordinate {value} outside [0, {extent}]"
        )
    b = int(math.floor(value / extent * bins))
    return bins - 1 if b > bins - 1 else b


def corner_index(x0: float, y0: float, grid: GridSpec) -> int:
    """Flat bin index of a corner; raises CoordinateRangeError when outside."""
    xb = _axis_bin(x0, grid.width, grid.w_bins, "x")
    yb = _axis_bin(y0, grid.height, grid.h_bins, "y")
    return yb * grid.w_bins + xb


def corner_indices(xs, ys, grid: GridSpec) -> np.ndarray:
    """Vectorized corner_index over coordinate arrays (hot path)."""
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    ys = np.ascontiguousarray(ys, dtype=np.float64)
    if xs.shape != ys.shape:
        raise ValueError(f"coordinate arrays differ in shape: {xs.shape} vs {ys.shape}")
    if xs.size and (xs.min() < 0.0 or xs.max() > grid.width):
        raise CoordinateRangeError(f"x coordinates outside [0, {grid.width}]")
    if ys.size and (ys.min() < 0.0 or ys.max() > grid.height):
        raise CoordinateRangeError(f"y coordinates outside [0, {grid.height}]")
    return kernels.corner_bins(
        xs, ys, float(grid.width), float(grid.height), grid.w_bins, grid.h_bins
    )


@dataclass(frozen=True)
class TokenVocabulary:
    """The set of location tokens for one grid, with their lexical forms."""

    grid: GridSpec
    template: str = DEFAULT_TOKEN_TEMPLATE

    def __post_init__(self):
        if self.template.count("{i}") != 1:
            raise ValueError(f"token template must contain one {{i}} slot, got {self.template!r}")

    @property
    def size(self) -> int:
        return self.grid.token_count

    def render(self, index: int) -> str:
        if not 0 <= index < self.size:
            raise TokenRangeError(f"token index {index} outside [0, {self.size})")
        return self.template.replace("{i}", str(index))

    def parse(self, text: str) -> int:
        prefix, suffix = self.template.split("{i}")
        body = text[len(prefix) : len(text) - len(suffix) if suffix else None]
        if (
            not (text.startswith(prefix) and text.endswith(suffix))
            or not body.isdigit()
            or (len(body) > 1 and body[0] == "0")
        ):
            raise TokenParseError(f"not a location token: {text!r}")
        index = int(body)
        if index >= self.size:
            raise TokenParseError(f"token {text!r} indexes outside the vocabulary ({self.size})")
        return index

    def token(self, index: int) -> LocationToken:
        return LocationToken(index, self.render(index))

    def with_image_size(self, width: float, height: float) -> "TokenVocabulary":
        return TokenVocabulary(self.grid.with_image_size(width, height), self.template)


def encode_corner(x0: float, y0: float, grid: GridSpec, vocab: TokenVocabulary | None = None) -> LocationToken:
    """Token whose bin contains (x0, y0); far-edge inputs clamp into the last bin."""
    index = corner_index(x0, y0, grid)
    if vocab is None:
        return LocationToken(index, DEFAULT_TOKEN_TEMPLATE.replace("{i}", str(index)))
    return vocab.token(index)


def decode_token(token: LocationToken | int, grid: GridSpec) -> tuple[float, float]:
    """Center of a token's bin, in pixels."""
    index = token.index if isinstance(token, LocationToken) else int(token)
    if not 0 <= index < grid.token_count:
        raise TokenRangeError(f"token index {index} outside [0, {grid.token_count})")
    y_bin, x_bin = divmod(index, grid.w_bins)
    x = (x_bin + 0.5) * grid.width / grid.w_bins
    y = (y_bin + 0.5) * grid.height / grid.h_bins
    return x, y


@dataclass(frozen=True)
class BoxPhrase:
    """A class name plus its corner tokens: two for 2D boxes, eight for 3D."""

    class_name: str
    tokens: tuple[LocationToken, ...]

    @property
    def token_tl(self) -> LocationToken:
        return self.tokens[0]

    @property
    def token_br(self) -> LocationToken:
        return self.tokens[-1]

    def render(self) -> str:
        return " ".join((self.class_name, *(t.text for t in self.tokens)))


def encode_box(ann: AnnotatedBox, grid: GridSpec, vocab: TokenVocabulary | None = None) -> BoxPhrase:
    """Encode a labeled box as (class name, top-left token, bottom-right token)."""
    tl = encode_corner(ann.box.x1, ann.box.y1, grid, vocab)
    br = encode_corner(ann.box.x2, ann.box.y2, grid, vocab)
    return BoxPhrase(ann.class_name, (tl, br))


@dataclass(frozen=True)
class EmbeddingTable:
    """Per-token embedding rows, one per location bin, values in [-1, 1]."""

    dim: int
    rows: np.ndarray  # (vocab size, dim) float32, row i belongs to token i

    def __post_init__(self):
        self.rows.setflags(write=False)


def _sincos_rows(positions: np.ndarray, half_dim: int) -> np.ndarray:
    # half_dim is even; pairs of (sin, cos) share one frequency.
    k = np.arange(half_dim // 2, dtype=np.float64)
    inv_freq = SINCOS_TEMPERATURE ** (2.0 * k / half_dim)
    args = positions[:, None] / inv_freq[None, :]
    out = np.empty((positions.shape[0], half_dim), dtype=np.float64)
    out[:, 0::2] = np.sin(args)
    out[:, 1::2] = np.cos(args)
    return out


def build_embeddings(vocab: TokenVocabulary, dim: int) -> EmbeddingTable:
    """Sine-cosine table: first half of each row encodes x_bin, second half y_bin."""
    if dim % 4 != 0 or dim <= 0:
        raise ValueError(f"embedding dim must be a positive multiple of 4, got {dim}")
    indices = np.arange(vocab.size, dtype=np.int64)
    x_bins = (indices % vocab.grid.w_bins).astype(np.float64)
    y_bins = (indices // vocab.grid.w_bins).astype(np.float64)
    half = dim // 2
    rows = np.concatenate([_sincos_rows(x_bins, half), _sincos_rows(y_bins, half)], axis=1)
    return EmbeddingTable(dim, rows.astype(np.float32))


def write_embedding_table(table: EmbeddingTable, path, vocab: TokenVocabulary | None = None) -> None:
    """Write the "GEOE" binary table plus a JSON sidecar at ``<path>.json``."""
    payload = _EMBED_HEADER.pack(EMBED_MAGIC, table.rows.shape[0], table.dim)
    payload += np.ascontiguousarray(table.rows, dtype="<f4").tobytes()
    from .fileio import atomic_write_bytes

    atomic_write_bytes(path, payload)
    if vocab is not None:
        sidecar = {
            "grid": {
                "w_bins": vocab.grid.w_bins,
                "h_bins": vocab.grid.h_bins,
                "width": vocab.grid.width,
                "height": vocab.grid.height,
            },
            "template": vocab.template,
            "rows": table.rows.shape[0],
            "dim": table.dim,
        }
        atomic_write_bytes(
            str(path) + ".json",
            (json.dumps(sidecar, ensure_ascii=False, separators=(",", ":")) + "\n").encode("utf-8"),
        )


def read_embedding_table(path) -> EmbeddingTable:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _EMBED_HEADER.size:
        raise BinaryFormatError(f"{path}: truncated header ({len(blob)} bytes)")
    magic, rows, dim = _EMBED_HEADER.unpack_from(blob)
    if magic != EMBED_MAGIC:
        raise BinaryFormatError(f"{path}: bad magic {magic!r}")
    expected = _EMBED_HEADER.size + rows * dim * 4
    if len(blob) != expected:
        raise BinaryFormatError(f"{path}: expected {expected} bytes, found {len(blob)}")
    data = np.frombuffer(blob, dtype="<f4", offset=_EMBED_HEADER.size).reshape(rows, dim)
    return EmbeddingTable(dim, data.copy())
