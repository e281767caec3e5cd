"""Embedding files, key-value reports and run manifests."""

from __future__ import annotations

import hashlib
import struct
from pathlib import Path

import numpy as np

_EMB_MAGIC = b"DPGEMB01"


def save_embedding_text(mat: np.ndarray, path) -> None:
    mat = np.asarray(mat, dtype=np.float64)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{mat.shape[0]} {mat.shape[1]}\n")
        for row in mat:
            fh.write(" ".join(repr(float(x)) for x in row) + "\n")


def load_embedding_text(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        n, r = map(int, fh.readline().split())
        data = np.loadtxt(fh, dtype=np.float64, ndmin=2)
    if data.shape != (n, r):
        raise ValueError(f"{path}: header says {n}x{r}, body is {data.shape}")
    return data


def save_embedding_binary(mat: np.ndarray, path) -> None:
    mat = np.ascontiguousarray(mat, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(_EMB_MAGIC)
        fh.write(struct.pack("<qq", *mat.shape))
        fh.write(mat.tobytes())


def load_embedding_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        if fh.read(len(_EMB_MAGIC)) != _EMB_MAGIC:
            raise ValueError(f"{path}: not a binary embedding file")
        n, r = struct.unpack("<qq", fh.read(16))
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != n * r:
        raise ValueError(f"{path}: truncated embedding file")
    return data.reshape(n, r).copy()


def load_embedding(path) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(len(_EMB_MAGIC))
    if head == _EMB_MAGIC:
        return load_embedding_binary(path)
    return load_embedding_text(path)


def write_kv(path, items: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in items.items():
            fh.write(f"{key}={_fmt(value)}\n")


def read_kv(path) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"{path}: malformed line {line!r}")
            out[key.strip()] = value.strip()
    return out


def _fmt(value) -> str:
    if hasattr(value, "value"):  # enums
        return str(value.value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
