"""Per-clip embedding vectors behind a pluggable backend boundary.

Neural models never run inside this package: real PANNs/VGGish/CLAP
inference happens in an external process wired up through
:func:`external_runner_backend`, or embeddings arrive precomputed in the
on-disk format below. The bundled :class:`MockStatsBackend` is a
deterministic, weight-free stand-in used throughout the tests.

On-disk format (little-endian, bit-exact roundtrip):

    magic "AEMB" | u32 version=1 | u32 dim | u32 count
    | u16 name-length | UTF-8 backend name
    | count*dim float32 row-major vectors
    | count * (u16 length | UTF-8 clip id)
"""

from __future__ import annotations

import shlex
import struct
import subprocess
import tempfile
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Protocol, Sequence

import numpy as np

from .audio import AudioClip, encode_wav, resample

__all__ = [
    "EmbeddingBackendId",
    "EmbeddingSet",
    "EmbeddingBackend",
    "MockStatsBackend",
    "BackendProtocolError",
    "EmbeddingFormatError",
    "embed_clips",
    "external_runner_backend",
    "ExternalRunnerBackend",
    "read_embeddings",
    "write_embeddings",
    "load_embeddings",
    "save_embeddings",
]

_MAGIC = b"AEMB"
_VERSION = 1


class BackendProtocolError(RuntimeError):
    """An embedding backend violated its contract (dim, shape, exit code)."""


class EmbeddingFormatError(ValueError):
    """Malformed embedding file."""


@dataclass(frozen=True)
class EmbeddingBackendId:
    """Identity of an embedding space: backend name, dimension, input rate.

    ``expected_sample_rate`` may be 0 when unknown (e.g. sets loaded from
    disk, where the format does not carry it).
    """

    name: str
    dim: int
    expected_sample_rate: int = 0

    def __post_init__(self):
        if not self.name:
            raise ValueError("backend name must be non-empty")
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.expected_sample_rate < 0:
            raise ValueError("expected_sample_rate must be >= 0")


@dataclass
class EmbeddingSet:
    """N x D matrix of embedding vectors from one backend, one row per clip."""

    backend: EmbeddingBackendId
    vectors: np.ndarray
    clip_ids: list[str]

    def __post_init__(self):
        vectors = np.ascontiguousarray(self.vectors, dtype=np.float32)
        if vectors.ndim != 2:
            raise ValueError(f"vectors must be 2-D, got shape {vectors.shape}")
        if vectors.shape[0] < 1:
            raise ValueError("embedding set must contain at least one row")
        if vectors.shape[1] != self.backend.dim:
            raise ValueError(
                f"row length {vectors.shape[1]} != backend dim {self.backend.dim}"
            )
        if not np.all(np.isfinite(vectors)):
            raise ValueError("embedding vectors contain non-finite values")
        clip_ids = [str(c) for c in self.clip_ids]
        if len(clip_ids) != vectors.shape[0]:
            raise ValueError("one clip id required per row")
        if len(set(clip_ids)) != len(clip_ids):
            raise ValueError("clip_ids must be unique")
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "clip_ids", clip_ids)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]


class EmbeddingBackend(Protocol):
    """Minimal backend surface consumed by :func:`embed_clips`."""

    id: EmbeddingBackendId
    reentrant: bool

    def embed_batch(self, clips: Sequence[AudioClip]) -> np.ndarray: ...


class MockStatsBackend:
    """Deterministic 8-D waveform-statistics backend for tests and demos.

    Each row summarizes the clip as [mean, RMS, max, min, zero-crossing
    rate, first-half energy, second-half energy, duration in seconds].
    """

    reentrant = True

    def __init__(self, expected_sample_rate: int = 16000):
        self.id = EmbeddingBackendId(
            name="mock-stats-v1", dim=8, expected_sample_rate=expected_sample_rate
        )

    def embed_batch(self, clips: Sequence[AudioClip]) -> np.ndarray:
        return np.stack([self._embed_one(clip) for clip in clips])

    @staticmethod
    def _embed_one(clip: AudioClip) -> np.ndarray:
        x = clip.samples.astype(np.float64)
        half = x.size // 2
        sign = x >= 0.0
        zcr = float(np.mean(sign[:-1] != sign[1:])) if x.size > 1 else 0.0
        return np.array(
            [
                float(np.mean(x)),
                float(np.sqrt(np.mean(x**2))),
                float(np.max(x)),
                float(np.min(x)),
                zcr,
                float(np.sum(x[:half] ** 2)),
                float(np.sum(x[half:] ** 2)),
                clip.duration_s,
            ]
        )


def embed_clips(
    clips: Sequence[AudioClip], backend: EmbeddingBackend, workers: int = 1
) -> EmbeddingSet:
    """Embed clips through a backend, one row per clip in input order.

    Clips are resampled to the backend's expected rate first. Clips with an
    empty ``source_id`` get positional ids; duplicate ids are rejected.
    ``workers`` > 1 parallelizes across clips, but only for backends that
    declare themselves reentrant.
    """
    if len(clips) == 0:
        raise ValueError("no clips to embed")
    rate = backend.id.expected_sample_rate
    prepared = [
        resample(clip, rate) if rate and clip.sample_rate != rate else clip
        for clip in clips
    ]
    ids = [
        clip.source_id if clip.source_id else f"clip-{i:04d}"
        for i, clip in enumerate(clips)
    ]

    if workers > 1 and getattr(backend, "reentrant", False) and len(prepared) > 1:
        chunks = np.array_split(np.arange(len(prepared)), min(workers, len(prepared)))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(
                pool.map(lambda idx: backend.embed_batch([prepared[i] for i in idx]), chunks)
            )
        vectors = np.concatenate(parts, axis=0)
    else:
        vectors = np.asarray(backend.embed_batch(prepared))

    if vectors.shape != (len(prepared), backend.id.dim):
        raise BackendProtocolError(
            f"backend {backend.id.name!r} returned shape {vectors.shape}, "
            f"expected {(len(prepared), backend.id.dim)}"
        )
    if not np.all(np.isfinite(vectors)):
        raise BackendProtocolError(
            f"backend {backend.id.name!r} returned non-finite values"
        )
    return EmbeddingSet(backend=backend.id, vectors=vectors, clip_ids=ids)


# ---------------------------------------------------------------------------
# External runner boundary


class ExternalRunnerBackend:
    """Backend that shells out to an embedding executable per batch.

    The command template must contain ``{in}`` and ``{out}`` placeholders;
    it is invoked as ``CMD --in <wav-list-file> --out <embedding-file>``
    style, must exit 0, and must write the embedding file format with one
    row per listed WAV, in list order. Invocations are serialized.
    """

    reentrant = False

    def __init__(
        self,
        command_template: str,
        backend_id: EmbeddingBackendId,
        batch_size: int = 32,
        timeout_s: float = 600.0,
    ):
        if "{in}" not in command_template or "{out}" not in command_template:
            raise ValueError("command template must contain {in} and {out} placeholders")
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        self.command_template = command_template
        self.id = backend_id
        self.batch_size = batch_size
        self.timeout_s = timeout_s
        self._lock = threading.Lock()

    def embed_batch(self, clips: Sequence[AudioClip]) -> np.ndarray:
        with self._lock:
            parts = []
            for start in range(0, len(clips), self.batch_size):
                parts.append(self._run_once(clips[start : start + self.batch_size]))
            return np.concatenate(parts, axis=0)

    def _run_once(self, clips: Sequence[AudioClip]) -> np.ndarray:
        with tempfile.TemporaryDirectory(prefix="soundscene-embed-") as tmp:
            tmp_path = Path(tmp)
            wav_paths = []
            for i, clip in enumerate(clips):
                wav_path = tmp_path / f"{i:04d}.wav"
                wav_path.write_bytes(encode_wav(clip))
                wav_paths.append(wav_path)
            list_path = tmp_path / "wavs.txt"
            list_path.write_text("".join(f"{p}\n" for p in wav_paths), encoding="utf-8")
            out_path = tmp_path / "embeddings.bin"

            command = [
                part.format(**{"in": str(list_path), "out": str(out_path)})
                for part in shlex.split(self.command_template)
            ]
            try:
                result = subprocess.run(
                    command, capture_output=True, timeout=self.timeout_s
                )
            except subprocess.TimeoutExpired as exc:
                raise BackendProtocolError(
                    f"external runner timed out after {self.timeout_s}s"
                ) from exc
            if result.returncode != 0:
                raise BackendProtocolError(
                    f"external runner exited {result.returncode}: "
                    f"{result.stderr.decode(errors='replace')[:500]}"
                )
            if not out_path.exists():
                raise BackendProtocolError("external runner produced no output file")
            try:
                produced = load_embeddings(out_path)
            except (EmbeddingFormatError, ValueError) as exc:
                raise BackendProtocolError(f"malformed runner output: {exc}") from exc
            if produced.backend.dim != self.id.dim:
                raise BackendProtocolError(
                    f"runner produced dim {produced.backend.dim}, expected {self.id.dim}"
                )
            if produced.n != len(clips):
                raise BackendProtocolError(
                    f"runner produced {produced.n} rows for {len(clips)} clips"
                )
            return produced.vectors


def external_runner_backend(
    command_template: str,
    backend_id: EmbeddingBackendId,
    batch_size: int = 32,
    timeout_s: float = 600.0,
) -> ExternalRunnerBackend:
    """Wrap an external embedding executable as a backend handle."""
    return ExternalRunnerBackend(command_template, backend_id, batch_size, timeout_s)


# ---------------------------------------------------------------------------
# On-disk format


def write_embeddings(embedding_set: EmbeddingSet, sink: BinaryIO) -> None:
    """Serialize an embedding set; exact inverse of :func:`read_embeddings`."""
    name_bytes = embedding_set.backend.name.encode("utf-8")
    if len(name_bytes) > 0xFFFF:
        raise ValueError("backend name too long for the format")
    sink.write(_MAGIC)
    sink.write(struct.pack("<III", _VERSION, embedding_set.backend.dim, embedding_set.n))
    sink.write(struct.pack("<H", len(name_bytes)))
    sink.write(name_bytes)
    sink.write(np.ascontiguousarray(embedding_set.vectors, dtype="<f4").tobytes())
    for clip_id in embedding_set.clip_ids:
        id_bytes = clip_id.encode("utf-8")
        if len(id_bytes) > 0xFFFF:
            raise ValueError(f"clip id too long for the format: {clip_id[:40]}...")
        sink.write(struct.pack("<H", len(id_bytes)))
        sink.write(id_bytes)


def read_embeddings(source: BinaryIO) -> EmbeddingSet:
    """Parse the on-disk format back into an :class:`EmbeddingSet`.

    The returned backend id carries ``expected_sample_rate=0`` since the
    format does not record it.
    """
    data = source.read()
    if len(data) < 4 or data[:4] != _MAGIC:
        raise EmbeddingFormatError("bad magic")
    offset = 4

    def take(count: int, what: str) -> bytes:
        nonlocal offset
        if offset + count > len(data):
            raise EmbeddingFormatError(f"payload length mismatch reading {what}")
        piece = data[offset : offset + count]
        offset += count
        return piece

    version, dim, count = struct.unpack("<III", take(12, "header"))
    if version != _VERSION:
        raise EmbeddingFormatError(f"unsupported version {version}")
    if dim == 0:
        raise EmbeddingFormatError("dim must be positive")
    if count == 0:
        raise EmbeddingFormatError("count must be positive")
    (name_len,) = struct.unpack("<H", take(2, "name length"))
    name = take(name_len, "name").decode("utf-8")

    vectors = np.frombuffer(take(4 * dim * count, "vectors"), dtype="<f4").reshape(
        count, dim
    )
    if not np.all(np.isfinite(vectors)):
        raise EmbeddingFormatError("non-finite values in payload")
    clip_ids = []
    for i in range(count):
        (id_len,) = struct.unpack("<H", take(2, f"id length {i}"))
        clip_ids.append(take(id_len, f"id {i}").decode("utf-8"))
    if offset != len(data):
        raise EmbeddingFormatError("payload length mismatch: trailing bytes")

    backend = EmbeddingBackendId(name=name, dim=dim, expected_sample_rate=0)
    return EmbeddingSet(backend=backend, vectors=vectors.copy(), clip_ids=clip_ids)


def save_embeddings(embedding_set: EmbeddingSet, path: str | Path) -> None:
    with open(path, "wb") as sink:
        write_embeddings(embedding_set, sink)


def load_embeddings(path: str | Path) -> EmbeddingSet:
    with open(path, "rb") as source:
        return read_embeddings(source)
