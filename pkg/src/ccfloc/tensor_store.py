"""Bit-exact binary tensor container (.ccft) and dataset-manifest ingestion.

The .ccft layout is fixed: 4-byte ASCII magic ``CCFT``, version byte (1),
dtype byte (1 = float32 little-endian), ndim byte, one zero pad byte,
``ndim`` u32 little-endian extents, then the row-major payload. Both the
engine and the feature extractor speak exactly this format, so everything
that crosses the process boundary round-trips byte-identically.

Manifests are JSON documents naming one positive image set: the class name
plus, per image, the source image, its per-kernel feature stack, its
boundary probability map, and ground-truth boxes.
"""

import json
import math
import os
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadMagic,
    BoxOutOfBounds,
    DimMismatch,
    DuplicateImageId,
    MissingFile,
    NonFiniteValue,
    ParseError,
    UnsupportedVersion,
)

MAGIC = b"CCFT"
VERSION = 1
DTYPE_FLOAT32 = 1

_HEADER = struct.Struct("<4sBBBB")


def save_tensor(path, array):
    """Write ``array`` to ``path`` as a float32 little-endian .ccft tensor."""
    arr = np.ascontiguousarray(array, dtype="<f4")
    if arr.ndim == 0 or arr.size == 0:
        raise DimMismatch("tensor must be nonempty with every extent >= 1")
    if arr.ndim > 255 or any(e > 0xFFFFFFFF for e in arr.shape):
        raise DimMismatch(f"shape {arr.shape} does not fit the header")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValue(f"refusing to write non-finite values to {path}")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, DTYPE_FLOAT32, arr.ndim, 0))
        fh.write(struct.pack("<%dI" % arr.ndim, *arr.shape))
        fh.write(arr.tobytes())


def _read_header(raw, path):
    if len(raw) < _HEADER.size or raw[:4] != MAGIC:
        raise BadMagic(f"{path}: not a CCFT tensor")
    _, version, dtype, ndim, pad = _HEADER.unpack_from(raw)
    if version != VERSION:
        raise UnsupportedVersion(f"{path}: unsupported version {version}")
    if dtype != DTYPE_FLOAT32:
        raise UnsupportedVersion(f"{path}: unsupported dtype code {dtype}")
    if pad != 0:
        raise BadMagic(f"{path}: corrupt header padding")
    if ndim == 0:
        raise DimMismatch(f"{path}: tensor declares zero dims")
    if len(raw) < _HEADER.size + 4 * ndim:
        raise DimMismatch(f"{path}: truncated extents")
    dims = struct.unpack_from("<%dI" % ndim, raw, _HEADER.size)
    if any(d == 0 for d in dims):
        raise DimMismatch(f"{path}: zero extent in {dims}")
    return dims, _HEADER.size + 4 * ndim


def peek_tensor_dims(path):
    """Read only the header of a .ccft file and return its extents."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read(_HEADER.size + 4 * 255)
    except OSError as exc:
        raise MissingFile(str(exc)) from exc
    dims, _ = _read_header(raw, path)
    return dims


def load_tensor(path):
    """Read a .ccft file back into a float32 array, validating every header
    field and the payload size; any disagreement is an error, never a
    silent truncation or pad."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise MissingFile(str(exc)) from exc
    dims, offset = _read_header(raw, path)
    count = math.prod(dims)
    if len(raw) - offset != 4 * count:
        raise DimMismatch(
            f"{path}: payload holds {(len(raw) - offset) // 4} scalars, "
            f"dims {dims} require {count}"
        )
    payload = np.frombuffer(raw, dtype="<f4", count=count, offset=offset)
    if not np.all(np.isfinite(payload)):
        raise NonFiniteValue(f"{path}: tensor holds NaN or Inf")
    return payload.reshape(dims).copy()


@dataclass(frozen=True)
class Box:
    """Axis-aligned pixel box, 0-indexed half-open: [xmin, xmax) x [ymin, ymax)."""

    xmin: int
    ymin: int
    xmax: int
    ymax: int

    def __post_init__(self):
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise BoxOutOfBounds(f"degenerate box {self.as_tuple()}")

    def as_tuple(self):
        return (self.xmin, self.ymin, self.xmax, self.ymax)

    @property
    def area(self):
        return (self.xmax - self.xmin) * (self.ymax - self.ymin)


@dataclass(frozen=True)
class ImageEntry:
    id: str
    image_path: str
    width: int
    height: int
    features_path: str
    boundary_path: str
    gt_boxes: tuple = field(default_factory=tuple)


@dataclass(frozen=True)
class DatasetManifest:
    class_name: str
    images: tuple

    def __len__(self):
        return len(self.images)


def load_manifest(path):
    """Load and fully validate a dataset manifest.

    Relative paths are resolved against the manifest's own directory. Every
    referenced file must exist, image ids must be unique, ground-truth boxes
    must lie inside the declared image bounds, and each boundary tensor's
    extents (checked from its header) must equal (height, width).
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise MissingFile(str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc

    if not isinstance(doc, dict):
        raise ParseError(f"{path}: manifest must be a JSON object")
    try:
        class_name = doc["class_name"]
        records = doc["images"]
    except KeyError as exc:
        raise ParseError(f"{path}: missing key {exc}") from exc
    if not isinstance(class_name, str) or not isinstance(records, list):
        raise ParseError(f"{path}: bad class_name or images field")
    if not records:
        raise ParseError(f"{path}: manifest lists no images")

    base = os.path.dirname(os.path.abspath(path))

    def resolve(p):
        full = p if os.path.isabs(p) else os.path.join(base, p)
        if not os.path.isfile(full):
            raise MissingFile(f"{path}: referenced file not found: {p}")
        return full

    seen = set()
    entries = []
    for rec in records:
        try:
            image_id = rec["id"]
            width = int(rec["width"])
            height = int(rec["height"])
            image_path = rec["image_path"]
            features_path = rec["features_path"]
            boundary_path = rec["boundary_path"]
            raw_boxes = rec["gt_boxes"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"{path}: malformed image record: {exc}") from exc
        if image_id in seen:
            raise DuplicateImageId(f"{path}: duplicate image id {image_id!r}")
        seen.add(image_id)
        if width < 1 or height < 1:
            raise ParseError(f"{path}: image {image_id!r} has empty extent")

        boxes = []
        for b in raw_boxes:
            if len(b) != 4:
                raise ParseError(f"{path}: gt box {b} is not 4 numbers")
            box = Box(int(b[0]), int(b[1]), int(b[2]), int(b[3]))
            if box.xmin < 0 or box.ymin < 0 or box.xmax > width or box.ymax > height:
                raise BoxOutOfBounds(
                    f"{path}: gt box {box.as_tuple()} outside {width}x{height} "
                    f"image {image_id!r}"
                )
            boxes.append(box)

        image_path = resolve(image_path)
        features_path = resolve(features_path)
        boundary_path = resolve(boundary_path)

        bdims = peek_tensor_dims(boundary_path)
        if tuple(bdims) != (height, width):
            raise DimMismatch(
                f"{path}: boundary tensor of {image_id!r} is {bdims}, "
                f"expected ({height}, {width})"
            )
        fdims = peek_tensor_dims(features_path)
        if len(fdims) != 3:
            raise DimMismatch(
                f"{path}: feature tensor of {image_id!r} must be "
                f"[kernels, h, w], got {fdims}"
            )

        entries.append(
            ImageEntry(
                id=image_id,
                image_path=image_path,
                width=width,
                height=height,
                features_path=features_path,
                boundary_path=boundary_path,
                gt_boxes=tuple(boxes),
            )
        )
    return DatasetManifest(class_name=class_name, images=tuple(entries))
