"""File formats: GLB1 label dumps, palette PNGs and JSON sidecars."""

from __future__ import annotations

import json
import math
import struct
from pathlib import Path

import numpy as np
from PIL import Image

MAGIC = b"GLB1"


class FormatError(ValueError):
    pass


def write_glb1(path, labels: np.ndarray) -> None:
    """``labels`` is (rows, cols); written row-major, top row first, little-endian."""
    arr = np.asarray(labels)
    if arr.ndim != 2:
        raise ValueError("labels must be a 2-D array")
    if arr.size and (arr.min() < 0 or arr.max() > 0xFFFFFFFF):
        raise ValueError("labels must fit in unsigned 32 bits")
    rows, cols = arr.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", cols, rows))
        fh.write(np.ascontiguousarray(arr, dtype="<u4").tobytes())


def read_glb1(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < 12 or data[:4] != MAGIC:
        raise FormatError(f"{path}: not a GLB1 file")
    cols, rows = struct.unpack("<II", data[4:12])
    body = data[12:]
    if len(body) != 4 * cols * rows:
        raise FormatError(f"{path}: expected {cols}x{rows} labels, found {len(body) // 4} values")
    return np.frombuffer(body, dtype="<u4").reshape(rows, cols).astype(np.uint32)


# --- colours ------------------------------------------------------------------


def _mix(x: int) -> int:
    """splitmix64 finaliser."""
    x = (x + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return x ^ (x >> 31)


def label_color(label: int) -> tuple[int, int, int]:
    """Fixed colour for a label: black for 0, otherwise derived from a hash of the id."""
    if label == 0:
        return (0, 0, 0)
    h = _mix(int(label))
    return tuple(64 + ((h >> s) & 0xFF) * 191 // 255 for s in (0, 16, 32))


def palette_image(labels: np.ndarray) -> Image.Image:
    arr = np.asarray(labels)
    ids, inv = np.unique(arr, return_inverse=True)
    lut = np.array([label_color(int(i)) for i in ids], dtype=np.uint8)
    return Image.fromarray(lut[inv.reshape(arr.shape)], "RGB")


def shade_image(steps: np.ndarray, flat: np.ndarray) -> Image.Image:
    """Greyscale by log escape step; cells where ``flat`` is set get one light grey."""
    s = np.asarray(steps, dtype=float)
    top = max(1.0, float(s.max()))
    g = np.where(s > 0, 30 + 150 * np.log1p(s) / math.log1p(top), 0)
    g = np.where(flat, 200, g)
    return Image.fromarray(g.astype(np.uint8), "L")


def write_png(path, image: Image.Image) -> None:
    # no timestamps or text chunks, so reruns are byte-identical
    image.save(path, format="PNG", optimize=False)


# --- JSON ---------------------------------------------------------------------


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return json.dumps(str(x))
        return format(x, ".17g")
    if isinstance(obj, complex):
        return _encode([obj.real, obj.imag], indent, level)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, Path):
        return json.dumps(str(obj))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        parts = [_encode(v, indent, level + 1) for v in seq]
        if all(not isinstance(v, (dict, list, tuple)) for v in seq):
            return "[" + ", ".join(parts) + "]"
        return "[\n" + ",\n".join(pad + p for p in parts) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float printed to 17 significant digits."""
    return _encode(obj, indent, 0) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def read_json(path):
    return json.loads(Path(path).read_text())
