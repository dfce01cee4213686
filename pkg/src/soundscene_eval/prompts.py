"""Structured prompt grammar, category grid, and dataset manifest rules.

Prompts pair an action-based foreground sound with an ambient background:
"<foreground> with <background> in the background", or the bare foreground
text when there is no background. Vehicles are never paired with traffic.
The development split additionally excludes the "none" and "birds"
backgrounds, so clean monophonic and bird-bed scenes only appear in the
evaluation split.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "ForegroundCategory",
    "BackgroundCategory",
    "PromptSpec",
    "PromptError",
    "ManifestEntry",
    "DatasetManifest",
    "ManifestReport",
    "ValidationTargets",
    "render_prompt",
    "category_grid",
    "validate_manifest",
    "co_occurrence",
    "load_manifest",
    "save_manifest",
]

SPLITS = ("dev", "eval")


class ForegroundCategory(str, enum.Enum):
    ANIMAL = "animal"
    VEHICLE = "vehicle"
    HUMAN = "human"
    ALARM = "alarm"
    TOOL = "tool"
    ENTRANCE = "entrance"


class BackgroundCategory(str, enum.Enum):
    CROWD = "crowd"
    TRAFFIC = "traffic"
    WATER = "water"
    BIRDS = "birds"
    NONE = "none"


# backgrounds excluded from the development split
DEV_EXCLUDED_BACKGROUNDS = frozenset(
    {BackgroundCategory.NONE, BackgroundCategory.BIRDS}
)


class PromptError(ValueError):
    """Prompt violates the grammar or pairing rules."""


@dataclass(frozen=True)
class PromptSpec:
    prompt_id: str
    foreground_text: str
    foreground_category: ForegroundCategory
    background_category: BackgroundCategory
    background_text: str = ""

    def __post_init__(self):
        if not self.prompt_id:
            raise PromptError("prompt_id must be non-empty")
        if not self.foreground_text.strip():
            raise PromptError(f"{self.prompt_id}: foreground text must be non-empty")
        if (
            self.foreground_category is ForegroundCategory.VEHICLE
            and self.background_category is BackgroundCategory.TRAFFIC
        ):
            raise PromptError(
                f"{self.prompt_id}: vehicle foregrounds are never paired with traffic"
            )
        has_text = bool(self.background_text.strip())
        if self.background_category is BackgroundCategory.NONE and has_text:
            raise PromptError(
                f"{self.prompt_id}: background text present but category is 'none'"
            )
        if self.background_category is not BackgroundCategory.NONE and not has_text:
            raise PromptError(
                f"{self.prompt_id}: background category "
                f"{self.background_category.value!r} requires background text"
            )

    @property
    def has_background(self) -> bool:
        return self.background_category is not BackgroundCategory.NONE


def render_prompt(spec: PromptSpec) -> str:
    """Render the caption presented to a synthesis system or a rater."""
    if spec.has_background:
        return f"{spec.foreground_text} with {spec.background_text} in the background"
    return spec.foreground_text


def category_grid() -> list[tuple[ForegroundCategory, BackgroundCategory]]:
    """All 29 admissible (foreground, background) pairings, in a stable order."""
    return [
        (fg, bg)
        for fg in ForegroundCategory
        for bg in BackgroundCategory
        if not (fg is ForegroundCategory.VEHICLE and bg is BackgroundCategory.TRAFFIC)
    ]


@dataclass(frozen=True)
class ManifestEntry:
    prompt: PromptSpec
    audio_path: str
    split: str

    def __post_init__(self):
        if self.split not in SPLITS:
            raise ValueError(f"split must be one of {SPLITS}, got {self.split!r}")


@dataclass
class DatasetManifest:
    entries: list[ManifestEntry] = field(default_factory=list)

    def split(self, name: str) -> list[ManifestEntry]:
        return [e for e in self.entries if e.split == name]

    def prompt_by_id(self, prompt_id: str) -> PromptSpec:
        for entry in self.entries:
            if entry.prompt.prompt_id == prompt_id:
                return entry.prompt
        raise KeyError(f"no prompt {prompt_id!r} in manifest")


@dataclass(frozen=True)
class ValidationTargets:
    """Configured size targets; the per-category ones are soft ("approximately")."""

    dev_size: int = 60
    eval_size: int = 250
    per_foreground: int = 50
    per_background: int = 60
    soft_tolerance: float = 0.20  # relative band before a count warning fires


@dataclass
class ManifestReport:
    ok: bool
    failures: list[str]
    warnings: list[str]
    split_counts: dict[str, int]
    foreground_counts: dict[str, int]
    background_counts: dict[str, int]


def validate_manifest(
    manifest: DatasetManifest, targets: ValidationTargets | None = None
) -> ManifestReport:
    """Check split sizes, the dev-split background exclusions, and id
    uniqueness; per-category count deviations are warnings only."""
    targets = targets or ValidationTargets()
    failures: list[str] = []
    warnings: list[str] = []

    seen: dict[str, int] = {}
    for entry in manifest.entries:
        pid = entry.prompt.prompt_id
        seen[pid] = seen.get(pid, 0) + 1
    for pid, count in sorted(seen.items()):
        if count > 1:
            failures.append(f"prompt id {pid!r} appears {count} times")

    split_counts = {name: len(manifest.split(name)) for name in SPLITS}
    if split_counts["dev"] != targets.dev_size:
        failures.append(
            f"dev split has {split_counts['dev']} entries, target {targets.dev_size}"
        )
    if split_counts["eval"] != targets.eval_size:
        failures.append(
            f"eval split has {split_counts['eval']} entries, target {targets.eval_size}"
        )

    for entry in manifest.split("dev"):
        if entry.prompt.background_category in DEV_EXCLUDED_BACKGROUNDS:
            failures.append(
                f"dev entry {entry.prompt.prompt_id!r} uses excluded background "
                f"{entry.prompt.background_category.value!r}"
            )

    fg_counts = {fg.value: 0 for fg in ForegroundCategory}
    bg_counts = {bg.value: 0 for bg in BackgroundCategory}
    for entry in manifest.entries:
        fg_counts[entry.prompt.foreground_category.value] += 1
        bg_counts[entry.prompt.background_category.value] += 1

    def check_soft(counts: dict[str, int], target: int, label: str) -> None:
        low = target * (1.0 - targets.soft_tolerance)
        high = target * (1.0 + targets.soft_tolerance)
        for name, count in counts.items():
            if not low <= count <= high:
                warnings.append(
                    f"{label} {name!r} has {count} entries, "
                    f"outside ~{target} (+/-{targets.soft_tolerance:.0%})"
                )

    if manifest.entries:
        check_soft(fg_counts, targets.per_foreground, "foreground")
        check_soft(bg_counts, targets.per_background, "background")

    return ManifestReport(
        ok=not failures,
        failures=failures,
        warnings=warnings,
        split_counts=split_counts,
        foreground_counts=fg_counts,
        background_counts=bg_counts,
    )


def co_occurrence(
    captions: list[str],
    fg_keywords: dict[str, list[str]],
    bg_keywords: dict[str, list[str]],
) -> np.ndarray:
    """Count captions mentioning both a foreground and a background category.

    Cell (f, b) counts captions containing at least one keyword of each
    (case-insensitive substring match). Rows and columns follow the
    iteration order of the keyword mappings. Useful for auditing how
    skewed a caption corpus is before training on it.
    """
    for label, keywords in list(fg_keywords.items()) + list(bg_keywords.items()):
        if not keywords:
            raise ValueError(f"keyword list for {label!r} is empty")
    lowered = [caption.lower() for caption in captions]
    matrix = np.zeros((len(fg_keywords), len(bg_keywords)), dtype=np.int64)
    for i, fg_list in enumerate(fg_keywords.values()):
        fg_hits = [any(k.lower() in c for k in fg_list) for c in lowered]
        for j, bg_list in enumerate(bg_keywords.values()):
            matrix[i, j] = sum(
                1
                for hit, caption in zip(fg_hits, lowered)
                if hit and any(k.lower() in caption for k in bg_list)
            )
    return matrix


# ---------------------------------------------------------------------------
# Manifest CSV

_MANIFEST_COLUMNS = [
    "prompt_id",
    "foreground_text",
    "foreground_category",
    "background_category",
    "background_text",
    "split",
    "audio_path",
]


def save_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(_MANIFEST_COLUMNS)
        for entry in manifest.entries:
            prompt = entry.prompt
            writer.writerow(
                [
                    prompt.prompt_id,
                    prompt.foreground_text,
                    prompt.foreground_category.value,
                    prompt.background_category.value,
                    prompt.background_text,
                    entry.split,
                    entry.audio_path,
                ]
            )


def load_manifest(source: str | Path | io.TextIOBase) -> DatasetManifest:
    """Read a manifest CSV; raises ValueError with the row number on bad rows."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8", newline="") as handle:
            return load_manifest(handle)

    reader = csv.DictReader(source)
    if reader.fieldnames != _MANIFEST_COLUMNS:
        raise ValueError(
            f"manifest header {reader.fieldnames} != expected {_MANIFEST_COLUMNS}"
        )
    entries = []
    for row_number, row in enumerate(reader, start=2):
        try:
            prompt = PromptSpec(
                prompt_id=row["prompt_id"],
                foreground_text=row["foreground_text"],
                foreground_category=ForegroundCategory(row["foreground_category"]),
                background_category=BackgroundCategory(row["background_category"]),
                background_text=row["background_text"],
            )
            entries.append(
                ManifestEntry(prompt=prompt, audio_path=row["audio_path"], split=row["split"])
            )
        except (ValueError, KeyError) as exc:
            raise ValueError(f"manifest row {row_number}: {exc}") from exc
    return DatasetManifest(entries=entries)
