"""Subjective rating storage and aggregation.

Records hold one rater's scores for one (system, prompt) pair: foreground
fit, background fit (absent for no-background prompts), and perceptual
quality, each on a 0-10 scale. Aggregation replaces contestants'
self-ratings, combines means into the 2:1:1 Final Rating, and reports
per-category means with standard errors plus Cronbach's alpha for
inter-rater agreement.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .prompts import DatasetManifest

__all__ = [
    "SCORE_KINDS",
    "RatingRecord",
    "ScoreStat",
    "SystemScores",
    "AggregationError",
    "replace_self_ratings",
    "final_rating",
    "aggregate",
    "cronbach_alpha",
    "load_ratings_csv",
    "write_ratings_csv",
]

SCORE_KINDS = ("foreground_fit", "background_fit", "quality")


class AggregationError(ValueError):
    pass


def _check_score(kind: str, value: float | None) -> None:
    if value is not None and not 0.0 <= value <= 10.0:
        raise ValueError(f"{kind} must be in [0, 10], got {value}")


@dataclass(frozen=True)
class RatingRecord:
    """One rater's scores for one (system, prompt) pair.

    ``rater_affiliation`` is the team/system the rater belongs to, or
    "organizer"; a record with ``rater_affiliation == system_id`` is a
    self-rating. ``background_fit`` is None for no-background prompts.
    Scores are floats: the UI collects integers, but self-rating
    replacement introduces fractional values.
    """

    rater_id: str
    rater_affiliation: str
    system_id: str
    prompt_id: str
    foreground_fit: float
    background_fit: float | None
    quality: float
    timestamps: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        _check_score("foreground_fit", self.foreground_fit)
        _check_score("background_fit", self.background_fit)
        _check_score("quality", self.quality)

    @property
    def is_self_rating(self) -> bool:
        return self.rater_affiliation == self.system_id

    def score(self, kind: str) -> float | None:
        return getattr(self, kind)


def replace_self_ratings(records: list[RatingRecord]) -> list[RatingRecord]:
    """Swap each self-rating for the rater's mean over all other systems.

    Applied per score kind, per (rater, prompt). Simply dropping
    self-ratings would let a team's absence raise or lower its own
    average, so replacement keeps the record count intact; organizer
    records pass through untouched. Raises when a contestant rated only
    their own system for some prompt.
    """
    by_rater_prompt: dict[tuple[str, str], list[RatingRecord]] = {}
    for record in records:
        by_rater_prompt.setdefault((record.rater_id, record.prompt_id), []).append(record)

    result = []
    for record in records:
        if not record.is_self_rating:
            result.append(record)
            continue
        peers = [
            other
            for other in by_rater_prompt[(record.rater_id, record.prompt_id)]
            if other.system_id != record.system_id
        ]
        replacements: dict[str, float | None] = {}
        for kind in SCORE_KINDS:
            own = record.score(kind)
            if own is None:
                continue
            values = [other.score(kind) for other in peers if other.score(kind) is not None]
            if not values:
                raise AggregationError(
                    f"rater {record.rater_id!r} self-rated {record.system_id!r} on "
                    f"prompt {record.prompt_id!r} but rated no other system ({kind})"
                )
            replacements[kind] = float(np.mean(values))
        result.append(replace(record, **replacements))
    return result


def final_rating(mean_fg: float, mean_bg: float, mean_quality: float) -> float:
    """Weighted sum of foreground fit, background fit, quality at 2:1:1."""
    for name, value in (("fg", mean_fg), ("bg", mean_bg), ("quality", mean_quality)):
        if not 0.0 <= value <= 10.0:
            raise ValueError(f"mean_{name} must be in [0, 10], got {value}")
    return (2.0 * mean_fg + mean_bg + mean_quality) / 4.0


@dataclass(frozen=True)
class ScoreStat:
    """Mean with its standard error (sample std / sqrt(n)).

    With a single observation the standard error is undefined; it is
    reported as 0.0 with ``stderr_defined`` False.
    """

    mean: float
    stderr: float
    n: int
    stderr_defined: bool = True

    @classmethod
    def from_values(cls, values: list[float]) -> "ScoreStat":
        arr = np.asarray(values, dtype=np.float64)
        if arr.size < 2:
            return cls(mean=float(arr.mean()), stderr=0.0, n=arr.size, stderr_defined=False)
        return cls(
            mean=float(arr.mean()),
            stderr=float(arr.std(ddof=1) / np.sqrt(arr.size)),
            n=arr.size,
        )


@dataclass
class SystemScores:
    system_id: str
    mean_fg: float
    mean_bg: float
    mean_quality: float
    final_rating: float
    n_records: int
    per_foreground: dict[str, dict[str, ScoreStat]]
    per_background: dict[str, dict[str, ScoreStat]]


def aggregate(
    records: list[RatingRecord],
    manifest: DatasetManifest,
    systems: list[str] | None = None,
) -> list[SystemScores]:
    """Per-system score summaries from (already self-rating-replaced) records.

    Grand means are over all of a system's records; background fit only
    over prompts that have a background. Per-category breakdowns follow
    the manifest's category assignments. Output is sorted by system id and
    independent of input record order.
    """
    ordered = sorted(records, key=lambda r: (r.system_id, r.rater_id, r.prompt_id))
    by_system: dict[str, list[RatingRecord]] = {}
    for record in ordered:
        by_system.setdefault(record.system_id, []).append(record)

    if systems is not None:
        missing = sorted(set(systems) - set(by_system))
        if missing:
            raise AggregationError(f"no rating records for systems: {missing}")

    prompt_categories = {
        entry.prompt.prompt_id: (
            entry.prompt.foreground_category.value,
            entry.prompt.background_category.value,
        )
        for entry in manifest.entries
    }

    results = []
    for system_id in sorted(by_system):
        system_records = by_system[system_id]
        fg_values = [r.foreground_fit for r in system_records]
        bg_values = [r.background_fit for r in system_records if r.background_fit is not None]
        quality_values = [r.quality for r in system_records]
        if not bg_values:
            raise AggregationError(
                f"system {system_id!r} has no background-bearing ratings; "
                "Final Rating is undefined"
            )
        mean_fg = float(np.mean(fg_values))
        mean_bg = float(np.mean(bg_values))
        mean_quality = float(np.mean(quality_values))

        per_fg: dict[str, dict[str, ScoreStat]] = {}
        per_bg: dict[str, dict[str, ScoreStat]] = {}
        for record in system_records:
            if record.prompt_id not in prompt_categories:
                raise AggregationError(
                    f"rating references prompt {record.prompt_id!r} missing from manifest"
                )
        for bucket, category_of in (
            (per_fg, lambda r: prompt_categories[r.prompt_id][0]),
            (per_bg, lambda r: prompt_categories[r.prompt_id][1]),
        ):
            groups: dict[str, list[RatingRecord]] = {}
            for record in system_records:
                groups.setdefault(category_of(record), []).append(record)
            for category in sorted(groups):
                stats = {}
                for kind in SCORE_KINDS:
                    values = [
                        r.score(kind) for r in groups[category] if r.score(kind) is not None
                    ]
                    if values:
                        stats[kind] = ScoreStat.from_values(values)
                bucket[category] = stats

        results.append(
            SystemScores(
                system_id=system_id,
                mean_fg=mean_fg,
                mean_bg=mean_bg,
                mean_quality=mean_quality,
                final_rating=final_rating(mean_fg, mean_bg, mean_quality),
                n_records=len(system_records),
                per_foreground=per_fg,
                per_background=per_bg,
            )
        )
    return results


def cronbach_alpha(matrix: np.ndarray) -> float:
    """Cronbach's alpha of a raters x items score matrix.

    Raters play the role of the instrument's items (consistency across
    raters), the rated trials are the observations:

        alpha = k/(k-1) * (1 - sum_i var(rater_i) / var(sum over raters))

    with unbiased (n-1) variances. Requires a complete matrix with at
    least 2 raters and 2 items.
    """
    scores = np.asarray(matrix, dtype=np.float64)
    if scores.ndim != 2:
        raise ValueError(f"expected raters x items matrix, got shape {scores.shape}")
    n_raters, n_items = scores.shape
    if n_raters < 2 or n_items < 2:
        raise ValueError(f"need >= 2 raters and >= 2 items, got {scores.shape}")
    if not np.all(np.isfinite(scores)):
        raise ValueError("score matrix has missing or non-finite cells")
    rater_variances = scores.var(axis=1, ddof=1)
    total_variance = scores.sum(axis=0).var(ddof=1)
    if total_variance == 0.0:
        raise ValueError("total variance across items is zero")
    return float(n_raters / (n_raters - 1) * (1.0 - rater_variances.sum() / total_variance))


# ---------------------------------------------------------------------------
# Ratings CSV

_RATINGS_COLUMNS = [
    "rater_id",
    "rater_affiliation",
    "system_id",
    "prompt_id",
    "foreground_fit",
    "background_fit",
    "quality",
]


def write_ratings_csv(records: list[RatingRecord], sink: str | Path | io.TextIOBase) -> None:
    if isinstance(sink, (str, Path)):
        with open(sink, "w", encoding="utf-8", newline="") as handle:
            write_ratings_csv(records, handle)
        return
    writer = csv.writer(sink)
    writer.writerow(_RATINGS_COLUMNS)
    for record in records:
        writer.writerow(
            [
                record.rater_id,
                record.rater_affiliation,
                record.system_id,
                record.prompt_id,
                repr(record.foreground_fit),
                "" if record.background_fit is None else repr(record.background_fit),
                repr(record.quality),
            ]
        )


def load_ratings_csv(source: str | Path | io.TextIOBase) -> list[RatingRecord]:
    """Read the ratings CSV; raises ValueError naming the offending row."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8", newline="") as handle:
            return load_ratings_csv(handle)

    reader = csv.DictReader(source)
    if reader.fieldnames != _RATINGS_COLUMNS:
        raise ValueError(
            f"ratings header {reader.fieldnames} != expected {_RATINGS_COLUMNS}"
        )
    records = []
    for row_number, row in enumerate(reader, start=2):
        try:
            background = row["background_fit"].strip()
            records.append(
                RatingRecord(
                    rater_id=row["rater_id"],
                    rater_affiliation=row["rater_affiliation"],
                    system_id=row["system_id"],
                    prompt_id=row["prompt_id"],
                    foreground_fit=float(row["foreground_fit"]),
                    background_fit=float(background) if background else None,
                    quality=float(row["quality"]),
                )
            )
        except (ValueError, KeyError, TypeError) as exc:
            raise ValueError(f"ratings row {row_number}: {exc}") from exc

    seen: set[tuple[str, str, str]] = set()
    for record in records:
        key = (record.rater_id, record.system_id, record.prompt_id)
        if key in seen:
            raise ValueError(f"duplicate rating for (rater, system, prompt) {key}")
        seen.add(key)
    return records
