import struct

import numpy as np
import pytest

from app.nn.params import init_params
from app.schemas.config import NetConfig
from app.services.checkpoint_service import (
    FORMAT_VERSION,
    MAGIC,
    decode_checkpoint,
    describe_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    save_checkpoint,
)
from app.utils.errors import CheckpointCorruptError, CheckpointVersionError


@pytest.mark.parametrize("config", [
    NetConfig(d=8, n_layers=2),
    NetConfig(d=6, n_layers=0, clip=5.5, use_lstm=False),
    NetConfig(d=4, n_layers=1, share_encoders=True, use_bidirectional=False),
])
def test_save_and_load_restore_every_tensor(tmp_path, config):
    params = init_params(config, seed=2)
    path = save_checkpoint(params, tmp_path / "nested" / "model.o2rl")
    restored, restored_config = load_checkpoint(path)
    assert restored_config == config
    assert list(restored) == list(params)
    for name in params:
        assert np.array_equal(restored[name].data, params[name].data)


def test_header_layout(tiny_params):
    payload = encode_checkpoint(tiny_params)
    assert payload[:4] == MAGIC
    assert struct.unpack("<I", payload[4:8]) == (FORMAT_VERSION,)
    d, layers, clip, flags = struct.unpack("<IIdI", payload[8:28])
    assert (d, layers, clip, flags) == (8, 1, 10.0, 1 | 2 | 4 | 8)


def test_truncated(tiny_params):
    payload = encode_checkpoint(tiny_params)
    for cut in (3, 10, 40, len(payload) - 1):
        with pytest.raises(CheckpointCorruptError):
            decode_checkpoint(payload[:cut])


def test_trailing_bytes(tiny_params):
    with pytest.raises(CheckpointCorruptError):
        decode_checkpoint(encode_checkpoint(tiny_params) + b"\x00")


def test_bad_magic_and_version(tiny_params):
    payload = encode_checkpoint(tiny_params)
    with pytest.raises(CheckpointCorruptError):
        decode_checkpoint(b"XXXX" + payload[4:])
    with pytest.raises(CheckpointVersionError):
        decode_checkpoint(payload[:4] + struct.pack("<I", FORMAT_VERSION + 1) + payload[8:])


def test_config_flags_mismatch_tensors(tiny_params):
    payload = bytearray(encode_checkpoint(tiny_params))
    # desliga use_gcn no cabeçalho: os tensores gcn passam a ser desconhecidos
    flags = struct.unpack("<I", payload[24:28])[0] & ~1
    payload[24:28] = struct.pack("<I", flags)
    with pytest.raises(CheckpointCorruptError):
        decode_checkpoint(bytes(payload))


def test_missing_file(tmp_path):
    with pytest.raises(CheckpointCorruptError):
        load_checkpoint(tmp_path / "absent.o2rl")


def test_atomic_write_leaves_no_temp_files(tmp_path, tiny_params):
    save_checkpoint(tiny_params, tmp_path / "a.o2rl")
    save_checkpoint(tiny_params, tmp_path / "a.o2rl")
    assert sorted(p.name for p in tmp_path.iterdir()) == ["a.o2rl"]


def test_describe(tmp_path, tiny_params):
    path = save_checkpoint(tiny_params, tmp_path / "m.o2rl")
    summary = describe_checkpoint(path)
    assert summary["parameters"] == tiny_params.size
    assert summary["config"]["d"] == 8
    assert summary["shapes"]["dec.v"] == [8]
