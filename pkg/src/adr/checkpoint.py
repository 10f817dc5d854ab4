"""Versioned model checkpoints: binary tensors plus a JSON sidecar.

A checkpoint is two files. ``<name>.adrckpt`` holds the parameter tensors
in a fixed little-endian layout:

    magic    8 bytes  b"ADRCKPT\\x00"
    version  u32      format version, currently 1
    count    u32      number of tensors
    then per tensor, in saved order:
      name_len u32, name UTF-8 bytes,
      ndim u32, each dimension as u64,
      data as float64 little-endian, C order

``<name>.adrckpt.json`` carries everything non-numeric: model kind and
config, both vocabularies, and training metadata. Load of a save is
bitwise exact because float64 payloads are written untouched.

Any structural problem on read raises ``CheckpointError``.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CheckpointError
from .vocab import Vocab

MAGIC = b"ADRCKPT\x00"
FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    kind: str
    model_config: dict
    src_vocab: Vocab
    tgt_vocab: Vocab
    params: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)


def _sidecar_path(path: Path) -> Path:
    return path.with_name(path.name + ".json")


def save_checkpoint(path: str | Path, ckpt: Checkpoint) -> None:
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(ckpt.params)))
        for name, array in ckpt.params.items():
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<I", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<I", array.ndim))
            fh.write(struct.pack(f"<{array.ndim}Q", *array.shape))
            fh.write(np.ascontiguousarray(array, dtype="<f8").tobytes())
    sidecar = {
        "format_version": FORMAT_VERSION,
        "kind": ckpt.kind,
        "model_config": ckpt.model_config,
        "src_vocab": list(ckpt.src_vocab.tokens),
        "tgt_vocab": list(ckpt.tgt_vocab.tokens),
        "metadata": ckpt.metadata,
    }
    _sidecar_path(path).write_text(
        json.dumps(sidecar, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def _read_exact(fh, n: int) -> bytes:
    buf = fh.read(n)
    if len(buf) != n:
        raise CheckpointError(f"truncated checkpoint: wanted {n} bytes, got {len(buf)}")
    return buf


def _vocab_from_tokens(tokens: list[str]) -> Vocab:
    tokens = tuple(tokens)
    return Vocab(tokens=tokens, index={tok: i for i, tok in enumerate(tokens)})


def load_checkpoint(path: str | Path) -> Checkpoint:
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"no such checkpoint: {path}")
    sidecar_path = _sidecar_path(path)
    if not sidecar_path.exists():
        raise CheckpointError(f"missing checkpoint sidecar: {sidecar_path}")
    try:
        sidecar = json.loads(sidecar_path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CheckpointError(f"unreadable checkpoint sidecar: {exc}") from exc
    for key in ("format_version", "kind", "model_config", "src_vocab", "tgt_vocab"):
        if key not in sidecar:
            raise CheckpointError(f"checkpoint sidecar missing key {key!r}")
    if sidecar["format_version"] != FORMAT_VERSION:
        raise CheckpointError(
            f"unsupported checkpoint version {sidecar['format_version']}, "
            f"expected {FORMAT_VERSION}"
        )

    params: dict[str, np.ndarray] = {}
    with open(path, "rb") as fh:
        if _read_exact(fh, len(MAGIC)) != MAGIC:
            raise CheckpointError(f"bad magic in {path}: not a checkpoint file")
        version, count = struct.unpack("<II", _read_exact(fh, 8))
        if version != FORMAT_VERSION:
            raise CheckpointError(
                f"unsupported checkpoint version {version}, expected {FORMAT_VERSION}"
            )
        for _ in range(count):
            (name_len,) = struct.unpack("<I", _read_exact(fh, 4))
            name = _read_exact(fh, name_len).decode("utf-8")
            (ndim,) = struct.unpack("<I", _read_exact(fh, 4))
            shape = struct.unpack(f"<{ndim}Q", _read_exact(fh, 8 * ndim))
            size = int(np.prod(shape, dtype=np.int64)) if ndim else 1
            data = np.frombuffer(_read_exact(fh, 8 * size), dtype="<f8")
            params[name] = data.astype(np.float64).reshape(shape)
        if fh.read(1):
            raise CheckpointError(f"trailing bytes after {count} tensors in {path}")

    return Checkpoint(
        kind=sidecar["kind"],
        model_config=sidecar["model_config"],
        src_vocab=_vocab_from_tokens(sidecar["src_vocab"]),
        tgt_vocab=_vocab_from_tokens(sidecar["tgt_vocab"]),
        params=params,
        metadata=sidecar.get("metadata", {}),
    )
