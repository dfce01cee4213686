"""Synthetic manifests, clips, and submission trees.

Generators for integration tests and demos: manifests that satisfy all
the dataset rules, simple deterministic waveforms, and on-disk audio
trees shaped like a real submission round.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .audio import AudioClip, encode_wav
from .prompts import (
    BackgroundCategory,
    DatasetManifest,
    ForegroundCategory,
    ManifestEntry,
    PromptSpec,
)

__all__ = ["make_tone", "make_noise", "grid_manifest", "compact_manifest",
           "listening_tree"]


def make_tone(freq: float, sample_rate: int, seconds: float, amp: float = 0.5,
              source_id: str = "") -> AudioClip:
    t = np.arange(int(round(seconds * sample_rate))) / sample_rate
    return AudioClip((amp * np.sin(2 * np.pi * freq * t)).astype(np.float32),
                     sample_rate, source_id)


def make_noise(rng: np.random.Generator, sample_rate: int, seconds: float,
               amp: float = 0.3, source_id: str = "") -> AudioClip:
    n = int(round(seconds * sample_rate))
    return AudioClip((amp * rng.standard_normal(n)).astype(np.float32),
                     sample_rate, source_id)


def grid_manifest(dev_size: int = 60, total: int = 310) -> DatasetManifest:
    """A manifest hitting every dataset target.

    ``total`` entries round-robin over the admissible category grid: every
    background receives an equal share (spread over its eligible
    foregrounds), and the dev split draws only from the crowd/traffic/water
    backgrounds. The defaults pass the validator with zero warnings.
    """
    foregrounds = list(ForegroundCategory)
    backgrounds = list(BackgroundCategory)
    per_background = total // len(backgrounds)
    specs: list[PromptSpec] = []
    for j, bg in enumerate(backgrounds):
        eligible = [
            fg for fg in foregrounds
            if not (fg is ForegroundCategory.VEHICLE and bg is BackgroundCategory.TRAFFIC)
        ]
        base, rem = divmod(per_background, len(eligible))
        for i, fg in enumerate(eligible):
            count = base + (1 if (i + j) % len(eligible) < rem else 0)
            for k in range(count):
                pid = f"p{len(specs):03d}"
                specs.append(
                    PromptSpec(
                        prompt_id=pid,
                        foreground_text=f"a {fg.value} sound {k}",
                        foreground_category=fg,
                        background_category=bg,
                        background_text=("" if bg is BackgroundCategory.NONE
                                         else f"{bg.value} ambience"),
                    )
                )
    dev_eligible = {BackgroundCategory.CROWD, BackgroundCategory.TRAFFIC,
                    BackgroundCategory.WATER}
    per_dev_bg = dev_size // len(dev_eligible)
    taken = {bg: 0 for bg in dev_eligible}
    entries = []
    for spec in specs:
        bg = spec.background_category
        if bg in dev_eligible and taken[bg] < per_dev_bg:
            split = "dev"
            taken[bg] += 1
        else:
            split = "eval"
        entries.append(ManifestEntry(prompt=spec, audio_path=f"audio/{spec.prompt_id}.wav",
                                     split=split))
    return DatasetManifest(entries=entries)


def compact_manifest(n_per_category: int = 4) -> DatasetManifest:
    """Small all-eval manifest: ``n_per_category`` prompts per foreground
    category, backgrounds cycling through all five (respecting exclusions)."""
    backgrounds = list(BackgroundCategory)
    entries = []
    counter = 0
    for fg in ForegroundCategory:
        for k in range(n_per_category):
            bg = backgrounds[(counter + k) % len(backgrounds)]
            if fg is ForegroundCategory.VEHICLE and bg is BackgroundCategory.TRAFFIC:
                bg = BackgroundCategory.WATER
            pid = f"q{counter:03d}"
            entries.append(
                ManifestEntry(
                    prompt=PromptSpec(
                        prompt_id=pid,
                        foreground_text=f"a {fg.value} making sound {k}",
                        foreground_category=fg,
                        background_category=bg,
                        background_text=("" if bg is BackgroundCategory.NONE
                                         else f"{bg.value} ambience"),
                    ),
                    audio_path=f"audio/{pid}.wav",
                    split="eval",
                )
            )
            counter += 1
    return DatasetManifest(entries=entries)


def listening_tree(root: str | Path, manifest: DatasetManifest,
                   system_prompts: dict[str, list[str] | None]) -> dict[str, Path]:
    """Write per-system directories of ``<prompt_id>.wav`` files.

    ``system_prompts`` maps system ids to the prompts they rendered (None
    for all of them). Each (system, prompt) file is a distinct tone so the
    audio is tellable apart in tests.
    """
    root = Path(root)
    systems = {}
    all_prompts = [e.prompt.prompt_id for e in manifest.entries]
    for idx, (system_id, prompts) in enumerate(sorted(system_prompts.items())):
        directory = root / system_id
        directory.mkdir(parents=True)
        for j, pid in enumerate(prompts if prompts is not None else all_prompts):
            clip = make_tone(150 + 37 * idx + 3 * j, 8000, 0.1)
            (directory / f"{pid}.wav").write_bytes(encode_wav(clip))
        systems[system_id] = directory
    return systems
