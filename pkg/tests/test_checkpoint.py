"""Tests for binary checkpoint serialization."""

import numpy as np
import pytest

from adr.checkpoint import (
    Checkpoint,
    load_checkpoint,
    save_checkpoint,
)
from adr.errors import CheckpointError
from adr.rng import SplitMix64
from adr.vocab import build_vocab


def _checkpoint():
    rng = SplitMix64(42)
    params = {
        "embed": rng.uniform_array((5, 3), -1.0, 1.0),
        "out.W": rng.uniform_array((3, 5), -1.0, 1.0),
        "out.b": np.zeros(5),
    }
    return Checkpoint(
        kind="soft_dot",
        model_config={"hidden_dim": 3, "cell_kind": "gru"},
        src_vocab=build_vocab([("oko", "oko")], min_count=1),
        tgt_vocab=build_vocab([("ọkọ́", "ọkọ́")], min_count=1),
        params=params,
        metadata={"epochs_run": 7},
    )


def test_roundtrip_is_bitwise(tmp_path):
    ckpt = _checkpoint()
    path = tmp_path / "model.adrckpt"
    save_checkpoint(path, ckpt)
    loaded = load_checkpoint(path)
    assert loaded.kind == ckpt.kind
    assert loaded.model_config == ckpt.model_config
    assert loaded.metadata == ckpt.metadata
    assert loaded.src_vocab.tokens == ckpt.src_vocab.tokens
    assert loaded.tgt_vocab.tokens == ckpt.tgt_vocab.tokens
    assert set(loaded.params) == set(ckpt.params)
    for name in ckpt.params:
        assert np.array_equal(loaded.params[name], ckpt.params[name])
        assert loaded.params[name].dtype == np.float64


def test_roundtrip_preserves_unicode_vocab(tmp_path):
    ckpt = _checkpoint()
    path = tmp_path / "model.adrckpt"
    save_checkpoint(path, ckpt)
    loaded = load_checkpoint(path)
    assert "ọkọ́" in loaded.tgt_vocab
    assert loaded.tgt_vocab.index["ọkọ́"] == ckpt.tgt_vocab.index["ọkọ́"]


def test_missing_file(tmp_path):
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "nope.adrckpt")


def test_missing_sidecar(tmp_path):
    path = tmp_path / "model.adrckpt"
    save_checkpoint(path, _checkpoint())
    (tmp_path / "model.adrckpt.json").unlink()
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_bad_magic(tmp_path):
    path = tmp_path / "model.adrckpt"
    save_checkpoint(path, _checkpoint())
    raw = bytearray(path.read_bytes())
    raw[:4] = b"XXXX"
    path.write_bytes(bytes(raw))
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_truncated_payload(tmp_path):
    path = tmp_path / "model.adrckpt"
    save_checkpoint(path, _checkpoint())
    raw = path.read_bytes()
    path.write_bytes(raw[: len(raw) - 16])
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_trailing_bytes(tmp_path):
    path = tmp_path / "model.adrckpt"
    save_checkpoint(path, _checkpoint())
    with open(path, "ab") as fh:
        fh.write(b"\x00")
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_unsupported_version_in_sidecar(tmp_path):
    path = tmp_path / "model.adrckpt"
    save_checkpoint(path, _checkpoint())
    sidecar = tmp_path / "model.adrckpt.json"
    text = sidecar.read_text(encoding="utf-8")
    sidecar.write_text(text.replace('"format_version": 1', '"format_version": 9'),
                       encoding="utf-8")
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_corrupt_sidecar_json(tmp_path):
    path = tmp_path / "model.adrckpt"
    save_checkpoint(path, _checkpoint())
    (tmp_path / "model.adrckpt.json").write_text("{not json", encoding="utf-8")
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_sidecar_missing_key(tmp_path):
    path = tmp_path / "model.adrckpt"
    save_checkpoint(path, _checkpoint())
    sidecar = tmp_path / "model.adrckpt.json"
    text = sidecar.read_text(encoding="utf-8")
    sidecar.write_text(text.replace('"kind"', '"unkind"'), encoding="utf-8")
    with pytest.raises(CheckpointError):
        load_checkpoint(path)
