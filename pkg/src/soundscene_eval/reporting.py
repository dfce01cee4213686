"""End-to-end evaluation runs and machine-readable reports.

Ties the pieces together: decode and contract-check each system's audio,
embed it (or load cached embeddings), score FAD against the reference,
aggregate subjective ratings, and correlate the two rankings. Reports are
deterministic given identical inputs and seed: running twice produces
byte-identical JSON.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .audio import AudioClip, OutputContract, decode_wav, validate_contract
from .embeddings import (
    EmbeddingBackend,
    EmbeddingSet,
    embed_clips,
    load_embeddings,
    save_embeddings,
)
from .fad import BiasPoint, fad, fad_bias_curve
from .prompts import DatasetManifest
from .ratings import (
    SCORE_KINDS,
    RatingRecord,
    SystemScores,
    aggregate,
    cronbach_alpha,
    load_ratings_csv,
    replace_self_ratings,
)
from .stats import spearman, pearson

__all__ = [
    "ObjectiveConfig",
    "ObjectiveRun",
    "SystemReport",
    "BudgetLimits",
    "run_objective",
    "run_subjective",
    "run_correlation",
    "run_bias_curves",
    "attach_subjective",
    "check_generation_budget",
    "dense_rank",
    "report_to_json",
    "write_report",
]

REPORT_SCHEMA = "soundscene-eval/report@1"


@dataclass(frozen=True)
class BudgetLimits:
    """Submission budget: minimum file count within a wall-clock allowance."""

    min_files: int = 250
    max_wall_seconds: float = 86400.0


def check_generation_budget(
    file_count: int, wall_seconds: float, limits: BudgetLimits | None = None
) -> bool:
    """True iff enough files were generated inside the time budget
    (boundaries inclusive)."""
    limits = limits or BudgetLimits()
    return file_count >= limits.min_files and wall_seconds <= limits.max_wall_seconds


@dataclass
class ObjectiveConfig:
    systems: dict[str, Path]
    reference_dir: Path | None = None
    reference_embeddings: Path | None = None
    backend: EmbeddingBackend | None = None
    embeddings_dir: Path | None = None
    contract: OutputContract = field(default_factory=OutputContract)
    split: str = "eval"
    seed: int = 0
    wall_seconds: dict[str, float] = field(default_factory=dict)
    budget: BudgetLimits = field(default_factory=BudgetLimits)


@dataclass
class FadEntry:
    backend_name: str
    split: str
    value: float
    n_eval: int
    n_ref: int


@dataclass
class SystemReport:
    system_id: str
    n_clips: int = 0
    fad: list[FadEntry] = field(default_factory=list)
    contract_violations: list[str] = field(default_factory=list)
    rank_by_fad: int | None = None
    rank_by_final_rating: int | None = None
    subjective: SystemScores | None = None
    generation_seconds: float | None = None
    budget_ok: bool | None = None
    error: str | None = None


@dataclass
class ObjectiveRun:
    backend_name: str
    split: str
    n_reference: int
    reports: list[SystemReport]
    seed: int


def dense_rank(values: list[float], descending: bool = False) -> list[int]:
    """Dense competition ranks (1 = best); equal values share a rank."""
    distinct = sorted(set(values), reverse=descending)
    position = {value: i + 1 for i, value in enumerate(distinct)}
    return [position[value] for value in values]


def _load_clip_dir(directory: Path) -> list[AudioClip]:
    paths = sorted(p for p in Path(directory).iterdir() if p.suffix.lower() == ".wav")
    if not paths:
        raise FileNotFoundError(f"no .wav files in {directory}")
    clips = []
    for path in paths:
        clip = decode_wav(path.read_bytes())
        clips.append(AudioClip(clip.samples, clip.sample_rate, source_id=path.name))
    return clips


def _embeddings_for(
    label: str,
    wav_dir: Path | None,
    config: ObjectiveConfig,
    explicit_path: Path | None = None,
) -> tuple[EmbeddingSet, list[AudioClip] | None]:
    """Load cached/precomputed embeddings if present, otherwise embed WAVs.

    Returns the set plus the decoded clips when decoding happened (for
    contract checks); clips are None when embeddings came from disk.
    """
    if explicit_path is not None:
        return load_embeddings(explicit_path), None
    cache_path = None
    if config.embeddings_dir is not None:
        cache_path = Path(config.embeddings_dir) / f"{label}.aemb"
        if cache_path.exists():
            return load_embeddings(cache_path), None
    if wav_dir is None:
        raise FileNotFoundError(f"no audio directory or embeddings for {label!r}")
    if config.backend is None:
        raise ValueError(f"no backend configured and no cached embeddings for {label!r}")
    clips = _load_clip_dir(wav_dir)
    embedding_set = embed_clips(clips, config.backend)
    if cache_path is not None:
        cache_path.parent.mkdir(parents=True, exist_ok=True)
        save_embeddings(embedding_set, cache_path)
    return embedding_set, clips


def run_objective(config: ObjectiveConfig) -> ObjectiveRun:
    """Decode, contract-check, embed, and FAD-score every system.

    A failure in one system is recorded on its report and never aborts the
    others. Contract violations are warnings: the offending files are
    still scored.
    """
    if not config.systems:
        raise ValueError("no system directories configured")
    ref_set, _ = _embeddings_for(
        "reference", config.reference_dir, config, config.reference_embeddings
    )

    reports = []
    for system_id in sorted(config.systems):
        report = SystemReport(system_id=system_id)
        reports.append(report)
        try:
            eval_set, clips = _embeddings_for(system_id, config.systems[system_id], config)
            report.n_clips = eval_set.n
            if clips is not None:
                for clip in clips:
                    contract_report = validate_contract(clip, config.contract)
                    if not contract_report.ok:
                        report.contract_violations.extend(
                            f"{clip.source_id}: {reason}" for reason in contract_report.failures
                        )
            score = fad(eval_set, ref_set)
            report.fad.append(
                FadEntry(
                    backend_name=ref_set.backend.name,
                    split=config.split,
                    value=score.value,
                    n_eval=score.n_eval,
                    n_ref=score.n_ref,
                )
            )
            seconds = config.wall_seconds.get(system_id)
            if seconds is not None:
                report.generation_seconds = float(seconds)
                report.budget_ok = check_generation_budget(
                    report.n_clips, seconds, config.budget
                )
        except Exception as exc:  # per-system isolation
            report.error = f"{type(exc).__name__}: {exc}"

    scored = [r for r in reports if r.fad]
    ranks = dense_rank([r.fad[0].value for r in scored])
    for report, rank_value in zip(scored, ranks):
        report.rank_by_fad = rank_value
    return ObjectiveRun(
        backend_name=ref_set.backend.name,
        split=config.split,
        n_reference=ref_set.n,
        reports=reports,
        seed=config.seed,
    )


def run_subjective(
    ratings_csv: str | Path, manifest: DatasetManifest
) -> tuple[list[SystemScores], list[RatingRecord]]:
    """Self-rating replacement followed by aggregation; also returns the
    replaced records (the correlation step reuses them)."""
    records = load_ratings_csv(ratings_csv)
    replaced = replace_self_ratings(records)
    return aggregate(replaced, manifest), replaced


def run_correlation(
    objective: ObjectiveRun,
    subjective: list[SystemScores],
    records: list[RatingRecord] | None = None,
) -> dict:
    """Statistics linking the objective and subjective rankings.

    FAD is lower-is-better, so two Spearman figures are reported: the raw
    coefficient against Final Rating (negative when they agree) and a
    rank-aligned form (FAD rank ascending vs rating rank descending,
    positive means agreement).
    """
    by_id = {scores.system_id: scores for scores in subjective}
    common = sorted(
        report.system_id
        for report in objective.reports
        if report.fad and report.system_id in by_id
    )
    summary: dict = {"n_systems": len(common), "systems": common}
    if len(common) < 3:
        summary["skipped"] = (
            f"need >= 3 systems scored by both pipelines, have {len(common)}"
        )
        return summary

    fad_by_id = {
        report.system_id: report.fad[0].value
        for report in objective.reports
        if report.fad
    }
    fad_values = [fad_by_id[system_id] for system_id in common]
    final_values = [by_id[system_id].final_rating for system_id in common]

    try:
        raw = spearman(fad_values, final_values)
        aligned = spearman(fad_values, [-v for v in final_values])
        summary["fad_vs_final_rating"] = {
            "raw": _correlation_dict(raw),
            "rank_aligned": _correlation_dict(aligned),
            "significant": aligned.p_value < 0.05,
        }
    except ValueError as exc:
        summary["fad_vs_final_rating"] = {"error": str(exc)}

    means = {
        "foreground_fit": [by_id[s].mean_fg for s in common],
        "background_fit": [by_id[s].mean_bg for s in common],
        "quality": [by_id[s].mean_quality for s in common],
    }
    pairs = {}
    kinds = list(means)
    for i, kind_a in enumerate(kinds):
        for kind_b in kinds[i + 1 :]:
            try:
                pairs[f"{kind_a}_vs_{kind_b}"] = _correlation_dict(
                    pearson(means[kind_a], means[kind_b])
                )
            except ValueError as exc:
                pairs[f"{kind_a}_vs_{kind_b}"] = {"error": str(exc)}
    summary["subjective_mean_correlations"] = pairs

    if records is not None:
        summary["cronbach_alpha"] = {
            kind: _alpha_for_kind(records, kind) for kind in SCORE_KINDS
        }
    return summary


def _alpha_for_kind(records: list[RatingRecord], kind: str) -> dict:
    """Cronbach's alpha over the rater x (system, prompt) matrix for one
    score kind, using only items every rater scored."""
    raters = sorted({r.rater_id for r in records})
    cells: dict[tuple[str, str], dict[str, float]] = {}
    for record in records:
        value = record.score(kind)
        if value is not None:
            cells.setdefault((record.system_id, record.prompt_id), {})[
                record.rater_id
            ] = value
    complete = sorted(
        item for item, votes in cells.items() if len(votes) == len(raters)
    )
    if len(raters) < 2 or len(complete) < 2:
        return {"skipped": f"{len(raters)} raters x {len(complete)} complete items"}
    matrix = np.array([[cells[item][rater] for item in complete] for rater in raters])
    try:
        return {
            "alpha": cronbach_alpha(matrix),
            "n_raters": len(raters),
            "n_items": len(complete),
        }
    except ValueError as exc:
        return {"error": str(exc)}


def _correlation_dict(result) -> dict:
    return {
        "coefficient": result.coefficient,
        "p_value": result.p_value,
        "n": result.n,
        "method": result.method.value,
    }


def attach_subjective(objective: ObjectiveRun, subjective: list[SystemScores]) -> None:
    """Join subjective scores onto the matching objective system reports and
    fill in the Final Rating ranks (descending: higher rating ranks first)."""
    by_id = {scores.system_id: scores for scores in subjective}
    matched = [
        (report, by_id[report.system_id])
        for report in objective.reports
        if report.system_id in by_id
    ]
    ranks = dense_rank([scores.final_rating for _, scores in matched], descending=True)
    for (report, scores), rank_value in zip(matched, ranks):
        report.subjective = scores
        report.rank_by_final_rating = rank_value


def run_bias_curves(
    config: ObjectiveConfig, sizes: list[int], repeats: int = 10
) -> dict[str, list[BiasPoint]]:
    """FAD-vs-size curves for every system against the configured reference."""
    ref_set, _ = _embeddings_for(
        "reference", config.reference_dir, config, config.reference_embeddings
    )
    curves = {}
    for system_id in sorted(config.systems):
        eval_set, _ = _embeddings_for(system_id, config.systems[system_id], config)
        usable = [s for s in sizes if s <= eval_set.n]
        curves[system_id] = fad_bias_curve(
            eval_set, ref_set, usable, repeats=repeats, seed=config.seed
        )
    return curves


# ---------------------------------------------------------------------------
# Serialization


def _system_report_dict(report: SystemReport) -> dict:
    data: dict = {
        "system_id": report.system_id,
        "n_clips": report.n_clips,
        "fad": [
            {
                "backend": entry.backend_name,
                "split": entry.split,
                "value": entry.value,
                "n_eval": entry.n_eval,
                "n_ref": entry.n_ref,
            }
            for entry in report.fad
        ],
        "contract_violations": report.contract_violations,
        "rank_by_fad": report.rank_by_fad,
        "rank_by_final_rating": report.rank_by_final_rating,
        "generation_seconds": report.generation_seconds,
        "budget_ok": report.budget_ok,
        "error": report.error,
    }
    if report.subjective is not None:
        data["subjective"] = _system_scores_dict(report.subjective)
    return data


def _score_stat_dict(stat) -> dict:
    return {
        "mean": stat.mean,
        "stderr": stat.stderr,
        "n": stat.n,
        "stderr_defined": stat.stderr_defined,
    }


def _system_scores_dict(scores: SystemScores) -> dict:
    return {
        "system_id": scores.system_id,
        "mean_foreground_fit": scores.mean_fg,
        "mean_background_fit": scores.mean_bg,
        "mean_quality": scores.mean_quality,
        "final_rating": scores.final_rating,
        "n_records": scores.n_records,
        "per_foreground": {
            category: {kind: _score_stat_dict(stat) for kind, stat in stats.items()}
            for category, stats in scores.per_foreground.items()
        },
        "per_background": {
            category: {kind: _score_stat_dict(stat) for kind, stat in stats.items()}
            for category, stats in scores.per_background.items()
        },
    }


def report_to_json(
    kind: str,
    objective: ObjectiveRun | None = None,
    subjective: list[SystemScores] | None = None,
    correlation: dict | None = None,
    bias_curves: dict[str, list[BiasPoint]] | None = None,
    extra: dict | None = None,
) -> str:
    """Assemble the versioned JSON report; deterministic for fixed inputs."""
    document: dict = {"schema": REPORT_SCHEMA, "kind": kind}
    if objective is not None:
        document["objective"] = {
            "backend": objective.backend_name,
            "split": objective.split,
            "n_reference": objective.n_reference,
            "seed": objective.seed,
            "systems": [_system_report_dict(r) for r in objective.reports],
        }
    if subjective is not None:
        ranks = dense_rank([s.final_rating for s in subjective], descending=True)
        document["subjective"] = {
            "systems": [
                dict(_system_scores_dict(s), rank_by_final_rating=rank_value)
                for s, rank_value in zip(subjective, ranks)
            ]
        }
    if correlation is not None:
        document["correlation"] = correlation
    if bias_curves is not None:
        document["bias_curves"] = {
            system_id: [
                {"size": p.size, "mean_fad": p.mean_fad, "std_fad": p.std_fad}
                for p in points
            ]
            for system_id, points in bias_curves.items()
        }
    if extra:
        document.update(extra)
    return json.dumps(document, sort_keys=True, indent=2) + "\n"


def write_report(
    out_dir: str | Path,
    kind: str,
    objective: ObjectiveRun | None = None,
    subjective: list[SystemScores] | None = None,
    correlation: dict | None = None,
    bias_curves: dict[str, list[BiasPoint]] | None = None,
    extra: dict | None = None,
) -> Path:
    """Write report.json plus flat per-figure CSVs; returns the JSON path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report_path = out / "report.json"
    report_path.write_text(
        report_to_json(kind, objective, subjective, correlation, bias_curves, extra),
        encoding="utf-8",
    )

    if objective is not None:
        lines = ["system_id,backend,split,fad,n_eval,n_ref,rank_by_fad"]
        for report in objective.reports:
            for entry in report.fad:
                lines.append(
                    f"{report.system_id},{entry.backend_name},{entry.split},"
                    f"{entry.value!r},{entry.n_eval},{entry.n_ref},{report.rank_by_fad}"
                )
        (out / "fad_scores.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    if subjective is not None:
        lines = ["system_id,axis,category,kind,mean,stderr,n"]
        for scores in subjective:
            for axis, bucket in (
                ("foreground", scores.per_foreground),
                ("background", scores.per_background),
            ):
                for category, stats in bucket.items():
                    for kind_name, stat in stats.items():
                        lines.append(
                            f"{scores.system_id},{axis},{category},{kind_name},"
                            f"{stat.mean!r},{stat.stderr!r},{stat.n}"
                        )
        (out / "category_means.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    if bias_curves is not None:
        lines = ["system_id,size,mean_fad,std_fad"]
        for system_id in sorted(bias_curves):
            for point in bias_curves[system_id]:
                lines.append(
                    f"{system_id},{point.size},{point.mean_fad!r},{point.std_fad!r}"
                )
        (out / "bias_curve.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return report_path
