"""Text file formats for gesture datasets and trained models.

Floating-point values are written as hexadecimal literals
(``float.hex``), so reading a file back reproduces every bit.

Dataset directory::

    manifest.tsv            tab-separated, header row, one row per gesture
    g_<class>_<signer>_<rep>.csv

Gesture file: header ``frame,j00x,j00y,j00z,...,j19z`` followed by one row
per frame, the frame index first.

Model file::

    SLRMODEL 1
    layers=<n> input=<i> hidden=<h> classes=<k>
    <name> <rows> <cols>
    <values, one matrix row per line>
    ...

Tensors appear in the order ``W_f.0 b_f.0 W_i.0 b_i.0 W_C.0 b_C.0 W_o.0
b_o.0 W_f.1 ... W_out b_out``; bias vectors are written as ``(n, 1)``
column matrices.
"""

from __future__ import annotations

import io
import math
import re
from pathlib import Path
from typing import Sequence

import numpy as np

from .exceptions import (DataIOError, InvalidValue, MalformedGesture, MalformedManifest,
                         MalformedModel, TensorShapeMismatch, TruncatedFile, VersionMismatch)
from .nn import ModelParams
from .skeleton import NUM_JOINTS, GestureSequence, HandMode

MANIFEST = "manifest.tsv"
MANIFEST_COLUMNS = ("relative_path", "class_id", "class_name", "signer_id",
                    "repetition", "hand_mode", "rotation_deg")
GESTURE_HEADER = ["frame"] + [f"j{j:02d}{axis}" for j in range(NUM_JOINTS) for axis in "xyz"]
MODEL_MAGIC = "SLRMODEL"
MODEL_VERSION = 1

_HEX_FLOAT = re.compile(r"^[+-]?0x[0-9a-f]+(\.[0-9a-f]*)?p[+-]?\d+$")


def gesture_filename(seq: GestureSequence) -> str:
    return f"g_{seq.class_id}_{seq.signer_id}_{seq.repetition}.csv"


def _parse_hex(token: str) -> float:
    """Strict lowercase hex-float parse; rejects decimals, inf and nan."""
    if not _HEX_FLOAT.match(token):
        raise ValueError(f"not a hexadecimal float literal: {token!r}")
    return float.fromhex(token)


def _write_text(path: Path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise DataIOError(f"cannot write {path}: {exc}") from exc


def _read_lines(path: Path, error) -> list[str]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            text = fh.read()
    except UnicodeDecodeError as exc:
        raise error(f"not valid UTF-8: {exc}", path) from exc
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc}") from exc
    if "\r" in text:
        raise error("line endings must be LF", path)
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines


# -- datasets ---------------------------------------------------------------

def format_gesture(seq: GestureSequence) -> str:
    buf = io.StringIO()
    buf.write(",".join(GESTURE_HEADER) + "\n")
    for t, frame in enumerate(seq.joints.reshape(len(seq), -1)):
        buf.write(f"{t}," + ",".join(float(v).hex() for v in frame) + "\n")
    return buf.getvalue()


def read_gesture_joints(path: str | Path) -> np.ndarray:
    """Parse one gesture file into a ``(T, 20, 3)`` array."""
    path = Path(path)
    lines = _read_lines(path, MalformedGesture)
    if not lines:
        raise MalformedGesture("empty file, expected a header row", path, 1)
    if lines[0].split(",") != GESTURE_HEADER:
        raise MalformedGesture("header does not match frame,j00x,...,j19z", path, 1)
    rows = []
    for n, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != len(GESTURE_HEADER):
            raise MalformedGesture(
                f"expected {len(GESTURE_HEADER) - 1} coordinate columns, found {len(fields) - 1}", path, n)
        if fields[0] != str(n - 2):
            raise MalformedGesture(f"frame index {fields[0]!r}, expected {n - 2}", path, n)
        try:
            rows.append([_parse_hex(tok) for tok in fields[1:]])
        except ValueError as exc:
            raise MalformedGesture(str(exc), path, n) from None
    if not rows:
        raise MalformedGesture("gesture has zero frames", path, len(lines))
    return np.array(rows, dtype=np.float64).reshape(len(rows), NUM_JOINTS, 3)


def write_dataset(dataset: Sequence[GestureSequence], directory: str | Path) -> None:
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataIOError(f"cannot create {directory}: {exc}") from exc
    rows = ["\t".join(MANIFEST_COLUMNS)]
    seen = set()
    for seq in dataset:
        name = gesture_filename(seq)
        if name in seen:
            raise InvalidValue(f"two sequences map to {name}")
        if any(ch in seq.class_name for ch in "\t\n\r"):
            raise InvalidValue(f"class name {seq.class_name!r} contains tab or newline")
        seen.add(name)
        _write_text(directory / name, format_gesture(seq))
        rows.append("\t".join([name, str(seq.class_id), seq.class_name, str(seq.signer_id),
                               str(seq.repetition), seq.hand_mode.value, repr(seq.rotation_deg)]))
    _write_text(directory / MANIFEST, "\n".join(rows) + "\n")


def _manifest_int(value: str, column: str, path: Path, line: int, minimum: int | None = 0) -> int:
    try:
        number = int(value)
    except ValueError:
        raise MalformedManifest(f"{column} {value!r} is not an integer", path, line) from None
    if minimum is not None and number < minimum:
        raise MalformedManifest(f"{column} must be >= {minimum}, got {number}", path, line)
    return number


def read_dataset(directory: str | Path) -> list[GestureSequence]:
    """Load every gesture listed in ``manifest.tsv``, in manifest order."""
    directory = Path(directory)
    path = directory / MANIFEST
    lines = _read_lines(path, MalformedManifest)
    if not lines:
        raise MalformedManifest("empty manifest, expected a header row", path, 1)
    header = lines[0].split("\t")
    missing = [c for c in MANIFEST_COLUMNS if c not in header]
    if missing:
        raise MalformedManifest(f"missing column(s): {', '.join(missing)}", path, 1)
    if len(set(header)) != len(header):
        raise MalformedManifest("duplicate column names", path, 1)
    col = {name: header.index(name) for name in MANIFEST_COLUMNS}
    out = []
    seen = set()
    for n, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != len(header):
            raise MalformedManifest(f"expected {len(header)} fields, found {len(fields)}", path, n)
        rel = fields[col["relative_path"]]
        if not rel or Path(rel).is_absolute() or ".." in Path(rel).parts:
            raise MalformedManifest(f"invalid relative path {rel!r}", path, n)
        if rel in seen:
            raise MalformedManifest(f"duplicate path {rel!r}", path, n)
        seen.add(rel)
        class_id = _manifest_int(fields[col["class_id"]], "class_id", path, n)
        signer_id = _manifest_int(fields[col["signer_id"]], "signer_id", path, n)
        repetition = _manifest_int(fields[col["repetition"]], "repetition", path, n, None)
        try:
            hand_mode = HandMode(fields[col["hand_mode"]])
        except ValueError:
            raise MalformedManifest(f"hand_mode {fields[col['hand_mode']]!r} is not Single or Double",
                                    path, n) from None
        try:
            rotation = float(fields[col["rotation_deg"]])
        except ValueError:
            raise MalformedManifest(f"rotation_deg {fields[col['rotation_deg']]!r} is not a number",
                                    path, n) from None
        if not math.isfinite(rotation):
            raise MalformedManifest("rotation_deg must be finite", path, n)
        if not (directory / rel).is_file():
            raise MalformedManifest(f"referenced file {rel!r} does not exist", path, n)
        joints = read_gesture_joints(directory / rel)
        out.append(GestureSequence(joints, class_id, fields[col["class_name"]], signer_id,
                                   repetition, hand_mode, rotation))
    return out


# -- models -----------------------------------------------------------------

def _tensor_matrix(array: np.ndarray) -> np.ndarray:
    return array.reshape(-1, 1) if array.ndim == 1 else array


def format_model(model: ModelParams) -> str:
    buf = io.StringIO()
    buf.write(f"{MODEL_MAGIC} {MODEL_VERSION}\n")
    buf.write(f"layers={model.num_layers} input={model.input_size} "
              f"hidden={model.hidden_size} classes={model.num_classes}\n")
    for name, array in model.named_tensors():
        matrix = _tensor_matrix(array)
        buf.write(f"{name} {matrix.shape[0]} {matrix.shape[1]}\n")
        for row in matrix:
            buf.write(" ".join(float(v).hex() for v in row) + "\n")
    return buf.getvalue()


def write_model(model: ModelParams, path: str | Path) -> None:
    _write_text(Path(path), format_model(model))


_TENSOR_HEAD = re.compile(r"^[A-Za-z_][\w.]* \d+ \d+$")
_DIMS = re.compile(r"^layers=(\d+) input=(\d+) hidden=(\d+) classes=(\d+)$")


def read_model(path: str | Path) -> ModelParams:
    path = Path(path)
    lines = _read_lines(path, MalformedModel)
    if not lines:
        raise TruncatedFile("empty model file", path, 1)
    magic = lines[0].split()
    if len(magic) != 2 or magic[0] != MODEL_MAGIC:
        raise MalformedModel(f"expected '{MODEL_MAGIC} {MODEL_VERSION}' header", path, 1)
    if magic[1] != str(MODEL_VERSION):
        raise VersionMismatch(f"unsupported model version {magic[1]!r}, expected {MODEL_VERSION}", path, 1)
    if len(lines) < 2:
        raise TruncatedFile("missing dimensions line", path, 2)
    dims = _DIMS.match(lines[1])
    if not dims:
        raise MalformedModel("expected 'layers=<n> input=<i> hidden=<h> classes=<k>'", path, 2)
    layers, inputs, hidden, classes = (int(g) for g in dims.groups())
    try:
        model = ModelParams(classes, inputs, hidden, layers)
    except ValueError as exc:
        raise MalformedModel(str(exc), path, 2) from None

    n = 2  # index of the next line to read
    for name, target in model.named_tensors():
        expected = _tensor_matrix(target).shape
        if n >= len(lines):
            raise TruncatedFile(f"missing tensor {name}", path, n + 1)
        head = lines[n].split()
        if len(head) != 3 or head[0] != name:
            raise MalformedModel(f"expected tensor header '{name} <rows> <cols>'", path, n + 1)
        try:
            shape = (int(head[1]), int(head[2]))
        except ValueError:
            raise MalformedModel(f"bad shape in tensor header {lines[n]!r}", path, n + 1) from None
        if shape != expected:
            raise TensorShapeMismatch(f"{name} declared {shape[0]}x{shape[1]}, "
                                      f"dimensions require {expected[0]}x{expected[1]}", path, n + 1)
        n += 1
        values: list[float] = []
        need = shape[0] * shape[1]
        while len(values) < need:
            if n >= len(lines):
                raise TruncatedFile(f"{name} has {len(values)} of {need} values", path, n + 1)
            if _TENSOR_HEAD.match(lines[n]):
                raise TruncatedFile(f"{name} has {len(values)} of {need} values", path, n + 1)
            tokens = lines[n].split()
            if len(values) + len(tokens) > need:
                raise TensorShapeMismatch(f"{name} has more than {need} values", path, n + 1)
            try:
                values.extend(_parse_hex(tok) for tok in tokens)
            except ValueError as exc:
                raise MalformedModel(str(exc), path, n + 1) from None
            n += 1
        target[...] = np.array(values).reshape(target.shape)
    if any(line.strip() for line in lines[n:]):
        raise MalformedModel("unexpected content after last tensor", path, n + 1)
    return model

