"""Shared fixtures: hand-built WAV bytes and synthetic submission trees."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
import pytest

from soundscene_eval import AudioClip, encode_wav
from soundscene_eval.synthetic import (
    compact_manifest as small_manifest,
    grid_manifest as build_grid_manifest,
    listening_tree as build_listening_tree,
    make_noise,
    make_tone,
)

__all__ = [
    "wav_bytes",
    "tone_clip",
    "noise_clip",
    "build_grid_manifest",
    "small_manifest",
    "build_listening_tree",
]

tone_clip = make_tone
noise_clip = make_noise


def wav_bytes(samples, sample_rate: int, kind: str = "float32") -> bytes:
    """Independent WAV writer (oracle for the decoder; no encode_wav reuse).

    ``samples`` is (n,) or (n, channels); float amplitudes for
    kind="float32", raw integers for kind="int16".
    """
    arr = np.asarray(samples)
    if arr.ndim == 1:
        arr = arr[:, None]
    channels = arr.shape[1]
    if kind == "float32":
        fmt_tag, bits = 3, 32
        payload = arr.astype("<f4").tobytes()
    elif kind == "int16":
        fmt_tag, bits = 1, 16
        payload = arr.astype("<i2").tobytes()
    else:
        raise ValueError(kind)
    block_align = channels * bits // 8
    fmt = struct.pack(
        "<HHIIHH", fmt_tag, channels, sample_rate, sample_rate * block_align,
        block_align, bits,
    )
    body = b"fmt " + struct.pack("<I", len(fmt)) + fmt
    body += b"data" + struct.pack("<I", len(payload)) + payload
    return b"RIFF" + struct.pack("<I", 4 + len(body)) + b"WAVE" + body


@pytest.fixture()
def fixture_tree(tmp_path: Path):
    """Reference dir of contract-conforming WAVs plus two system dirs: an
    exact copy of the reference and a noise system."""
    rng = np.random.default_rng(1234)
    reference = tmp_path / "reference"
    reference.mkdir()
    for i in range(12):
        clip = make_noise(rng, 32000, 4.0)
        mix = AudioClip(
            (clip.samples + make_tone(200 + 40 * i, 32000, 4.0, amp=0.4).samples),
            32000,
        )
        (reference / f"ref{i:02d}.wav").write_bytes(encode_wav(mix))

    mirror = tmp_path / "sys_mirror"
    mirror.mkdir()
    for path in reference.iterdir():
        (mirror / path.name).write_bytes(path.read_bytes())

    noisy = tmp_path / "sys_noise"
    noisy.mkdir()
    for i in range(12):
        (noisy / f"gen{i:02d}.wav").write_bytes(
            encode_wav(make_noise(rng, 32000, 4.0, amp=0.9))
        )
    return {"root": tmp_path, "reference": reference,
            "systems": {"sys_mirror": mirror, "sys_noise": noisy}}
