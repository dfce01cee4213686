"""Waveform decode/encode, resampling, and segment selection.

All operations are pure: they take an :class:`AudioClip` and return a new
one, so they are safe to call from multiple threads on distinct clips.
Only RIFF/WAVE files are handled (PCM int16 and IEEE float32); the encoder
always emits float32 mono.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "AudioClip",
    "OutputContract",
    "ContractReport",
    "AudioDecodeError",
    "decode_wav",
    "encode_wav",
    "resample",
    "select_max_energy_segment",
    "validate_contract",
]


class AudioDecodeError(ValueError):
    """Raised for malformed or unsupported WAV input."""


@dataclass
class AudioClip:
    """Mono waveform with its sample rate.

    ``samples`` is kept as a float32 vector; decoded integer PCM is scaled
    to [-1, 1] by dividing by 32768 so that -1.0 stays exactly
    representable.
    """

    samples: np.ndarray
    sample_rate: int
    source_id: str = ""

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float32)
        if samples.ndim != 1:
            raise ValueError(f"clip must be mono (1-D), got shape {samples.shape}")
        if samples.size == 0:
            raise ValueError("clip has no samples")
        if not np.all(np.isfinite(samples)):
            raise ValueError("clip contains non-finite samples")
        if int(self.sample_rate) <= 0:
            raise ValueError(f"sample rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate

    def energy(self) -> float:
        """Sum of squared samples."""
        return float(np.sum(self.samples.astype(np.float64) ** 2))


@dataclass(frozen=True)
class OutputContract:
    """File-level submission contract: fixed duration and sample rate."""

    duration_s: float = 4.0
    sample_rate: int = 32000
    tolerance_samples: int = 0

    def __post_init__(self):
        if self.duration_s <= 0:
            raise ValueError("duration_s must be positive")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")

    @property
    def expected_samples(self) -> int:
        return _round_half_up(self.duration_s * self.sample_rate)


@dataclass
class ContractReport:
    """Outcome of checking one clip against an :class:`OutputContract`."""

    source_id: str
    ok: bool
    failures: list[str] = field(default_factory=list)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


# ---------------------------------------------------------------------------
# WAV container


def decode_wav(data: bytes) -> AudioClip:
    """Decode RIFF/WAVE bytes into a mono AudioClip.

    Accepts PCM int16 and IEEE float32, any channel count; channels are
    averaged (arithmetic mean) down to mono.
    """
    if len(data) < 12 or data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise AudioDecodeError("not a RIFF/WAVE stream")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos : pos + 4]
        (chunk_size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8 : pos + 8 + chunk_size]
        if len(body) < chunk_size:
            raise AudioDecodeError(f"truncated {chunk_id!r} chunk")
        if chunk_id == b"fmt ":
            if chunk_size < 16:
                raise AudioDecodeError("fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            payload = body
        pos += 8 + chunk_size + (chunk_size & 1)  # chunks are word-aligned

    if fmt is None:
        raise AudioDecodeError("missing fmt chunk")
    if payload is None:
        raise AudioDecodeError("missing data chunk")

    audio_format, channels, sample_rate, _byte_rate, _block_align, bits = fmt
    if channels < 1:
        raise AudioDecodeError("zero channels")
    if audio_format == 1 and bits == 16:
        raw = np.frombuffer(payload[: len(payload) - len(payload) % (2 * channels)], dtype="<i2")
        frames = raw.astype(np.float64) / 32768.0
    elif audio_format == 3 and bits == 32:
        raw = np.frombuffer(payload[: len(payload) - len(payload) % (4 * channels)], dtype="<f4")
        frames = raw.astype(np.float64)
    else:
        raise AudioDecodeError(
            f"unsupported codec: format={audio_format}, bits={bits} "
            "(only PCM int16 and IEEE float32 are handled)"
        )
    if raw.size == 0:
        raise AudioDecodeError("zero-length data chunk")

    mono = frames.reshape(-1, channels).mean(axis=1)
    return AudioClip(samples=mono.astype(np.float32), sample_rate=int(sample_rate))


def encode_wav(clip: AudioClip) -> bytes:
    """Encode a clip as mono float32 WAV; inverse of :func:`decode_wav`."""
    samples = np.ascontiguousarray(clip.samples, dtype="<f4")
    payload = samples.tobytes()
    fmt = struct.pack("<HHIIHH", 3, 1, clip.sample_rate, clip.sample_rate * 4, 4, 32)
    fact = struct.pack("<I", samples.size)
    chunks = (
        b"fmt " + struct.pack("<I", len(fmt)) + fmt
        + b"fact" + struct.pack("<I", len(fact)) + fact
        + b"data" + struct.pack("<I", len(payload)) + payload
    )
    return b"RIFF" + struct.pack("<I", 4 + len(chunks)) + b"WAVE" + chunks


# ---------------------------------------------------------------------------
# Resampling

_SINC_ZEROS = 64  # zero crossings per side
_KAISER_BETA = 8.6


def _phase_filters(up: int, down: int) -> tuple[np.ndarray, int]:
    """Windowed-sinc interpolation filters for a rational rate change.

    Returns (filters, support): one row per output phase r (fractional
    offset r/up input samples), covering input offsets -support..+support.
    Rows are normalized to unit sum so DC is preserved exactly.
    """
    cutoff = min(1.0, up / down)  # relative to the input Nyquist
    support = int(math.ceil(_SINC_ZEROS / cutoff))
    taps = np.arange(2 * support + 1)
    filters = np.empty((up, 2 * support + 1))
    for r in range(up):
        tau = (r / up) + support - taps
        window_arg = tau * cutoff / _SINC_ZEROS
        window = np.where(
            np.abs(window_arg) <= 1.0,
            np.i0(_KAISER_BETA * np.sqrt(np.maximum(0.0, 1.0 - window_arg**2)))
            / np.i0(_KAISER_BETA),
            0.0,
        )
        kernel = cutoff * np.sinc(cutoff * tau) * window
        filters[r] = kernel / kernel.sum()
    return filters, support


def resample(clip: AudioClip, target_rate: int) -> AudioClip:
    """Band-limited resampling (polyphase windowed sinc, Kaiser window).

    Output length is round(n * target_rate / input_rate). A no-op (same
    samples object) when the rates already match.
    """
    if target_rate <= 0:
        raise ValueError("target_rate must be positive")
    if target_rate == clip.sample_rate:
        return AudioClip(clip.samples, clip.sample_rate, clip.source_id)

    g = math.gcd(clip.sample_rate, int(target_rate))
    up = int(target_rate) // g
    down = clip.sample_rate // g
    x = clip.samples.astype(np.float64)
    n = x.size
    out_len = (2 * n * up + down) // (2 * down)  # round(n * up / down), exact
    filters, support = _phase_filters(up, down)
    n_taps = filters.shape[1]

    pad = np.zeros(n + 2 * support + down + 2)
    pad[support : support + n] = x
    out = np.zeros(out_len)
    for m0 in range(min(up, out_len)):
        r = (m0 * down) % up
        k0 = (m0 * down) // up
        count = (out_len - m0 + up - 1) // up
        acc = np.zeros(count)
        for j in range(n_taps):
            acc += filters[r, j] * pad[k0 + j : k0 + j + count * down : down]
        out[m0::up] = acc
    return AudioClip(out.astype(np.float32), int(target_rate), clip.source_id)


# ---------------------------------------------------------------------------
# Segmentation and contract checks


def select_max_energy_segment(clip: AudioClip, segment_s: float, hop_s: float) -> AudioClip:
    """Pick the fixed-length window with the largest sum of squared samples.

    Candidate starts are 0, hop, 2*hop, ... while the window still fits.
    Ties go to the earliest start.
    """
    if hop_s <= 0:
        raise ValueError("hop_s must be positive")
    seg_len = _round_half_up(segment_s * clip.sample_rate)
    hop = _round_half_up(hop_s * clip.sample_rate)
    if seg_len <= 0 or hop <= 0:
        raise ValueError("segment and hop must span at least one sample")
    if clip.samples.size < seg_len:
        raise ValueError(
            f"clip is {clip.samples.size} samples, shorter than the "
            f"{seg_len}-sample segment"
        )
    x = clip.samples.astype(np.float64)
    starts = range(0, x.size - seg_len + 1, hop)
    energies = [float(np.sum(x[s : s + seg_len] ** 2)) for s in starts]
    best = int(np.argmax(energies))  # argmax takes the first maximum
    start = best * hop
    return AudioClip(clip.samples[start : start + seg_len], clip.sample_rate, clip.source_id)


def validate_contract(clip: AudioClip, contract: OutputContract) -> ContractReport:
    """Check one clip against the output contract; failures are reported,
    never raised."""
    failures = []
    if clip.sample_rate != contract.sample_rate:
        failures.append(
            f"sample rate {clip.sample_rate} Hz != contract {contract.sample_rate} Hz"
        )
    expected = contract.expected_samples
    if abs(clip.samples.size - expected) > contract.tolerance_samples:
        failures.append(
            f"length {clip.samples.size} samples != contract {expected} "
            f"(tolerance {contract.tolerance_samples})"
        )
    return ContractReport(source_id=clip.source_id, ok=not failures, failures=failures)
