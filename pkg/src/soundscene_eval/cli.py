"""Command-line interface for the evaluation pipeline.

Subcommands: ``objective``, ``subjective``, ``correlate``,
``validate-manifest``, ``bias-curve``, ``budget-check``. Options come
from a flat key=value config file plus flag overrides; flags win. Exit
codes: 0 success, 1 hard error, 2 validation failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .audio import OutputContract
from .embeddings import EmbeddingBackendId, MockStatsBackend, external_runner_backend
from .prompts import load_manifest, validate_manifest
from .reporting import (
    BudgetLimits,
    ObjectiveConfig,
    attach_subjective,
    check_generation_budget,
    report_to_json,
    run_bias_curves,
    run_correlation,
    run_objective,
    run_subjective,
    write_report,
)

__all__ = ["main", "parse_config_file", "build_backend"]


def parse_config_file(path: str | Path) -> dict:
    """Flat ``key = value`` config: comments with '#', dotted keys nest,
    comma-separated values become lists, numerals and booleans are coerced."""
    config: dict = {}
    for line_number, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{line_number}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        target = config
        parts = key.strip().split(".")
        for part in parts[:-1]:
            target = target.setdefault(part, {})
        target[parts[-1]] = _coerce(value.strip())
    return config


def _coerce(value: str):
    if "," in value:
        return [_coerce(part.strip()) for part in value.split(",") if part.strip()]
    lowered = value.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    for converter in (int, float):
        try:
            return converter(value)
        except ValueError:
            continue
    return value.strip("\"'")


def build_backend(spec: str, options: dict):
    """Backend from its CLI spelling: ``mock``, ``mock:<rate>``, or
    ``external:<command template>`` (id fields from config)."""
    if spec == "mock":
        return MockStatsBackend()
    if spec.startswith("mock:"):
        return MockStatsBackend(expected_sample_rate=int(spec.split(":", 1)[1]))
    if spec.startswith("external:"):
        template = spec.split(":", 1)[1]
        try:
            backend_id = EmbeddingBackendId(
                name=options["external_name"],
                dim=int(options["external_dim"]),
                expected_sample_rate=int(options.get("external_rate", 0)),
            )
        except KeyError as exc:
            raise ValueError(
                f"external backend needs config keys external_name/external_dim ({exc})"
            ) from exc
        return external_runner_backend(template, backend_id)
    raise ValueError(f"unknown backend spec {spec!r}")


def _system_dirs(values: list[str]) -> dict[str, Path]:
    systems = {}
    for value in values:
        for part in str(value).split(","):
            part = part.strip()
            if not part:
                continue
            path = Path(part)
            if path.name in systems:
                raise ValueError(f"duplicate system id {path.name!r}")
            systems[path.name] = path
    return systems


def _objective_config(args, config: dict) -> ObjectiveConfig:
    backend_spec = args.backend or config.get("backend", "mock")
    system_values = args.systems or config.get("systems") or []
    if isinstance(system_values, (str, Path)):
        system_values = [system_values]
    reference = args.reference or config.get("reference")
    embeddings_dir = args.embeddings_dir or config.get("embeddings_dir")
    contract = OutputContract(
        duration_s=float(config.get("contract_duration_s", 4.0)),
        sample_rate=int(config.get("contract_sample_rate", 32000)),
        tolerance_samples=int(config.get("contract_tolerance_samples", 0)),
    )
    wall_seconds = {
        str(system): float(seconds)
        for system, seconds in config.get("wall_seconds", {}).items()
    }
    return ObjectiveConfig(
        systems=_system_dirs(system_values),
        reference_dir=Path(reference) if reference else None,
        reference_embeddings=(
            Path(config["reference_embeddings"]) if "reference_embeddings" in config else None
        ),
        backend=build_backend(backend_spec, config),
        embeddings_dir=Path(embeddings_dir) if embeddings_dir else None,
        contract=contract,
        split=str(config.get("split", "eval")),
        seed=args.seed if args.seed is not None else int(config.get("seed", 0)),
        wall_seconds=wall_seconds,
        budget=_budget_limits(config),
    )


def _budget_limits(config: dict) -> BudgetLimits:
    return BudgetLimits(
        min_files=int(config.get("budget_files", 250)),
        max_wall_seconds=float(config.get("budget_seconds", 86400)),
    )


def _emit(args, kind: str, **sections) -> None:
    if args.out:
        path = write_report(args.out, kind, **sections)
        print(f"report written to {path}")
    else:
        sys.stdout.write(report_to_json(kind, **sections))


def _cmd_objective(args, config) -> int:
    run = run_objective(_objective_config(args, config))
    _emit(args, "objective", objective=run)
    return 0 if any(r.fad for r in run.reports) else 1


def _cmd_subjective(args, config) -> int:
    manifest = load_manifest(args.manifest or config["manifest"])
    scores, _ = run_subjective(args.ratings or config["ratings"], manifest)
    _emit(args, "subjective", subjective=scores)
    return 0


def _cmd_correlate(args, config) -> int:
    manifest = load_manifest(args.manifest or config["manifest"])
    scores, records = run_subjective(args.ratings or config["ratings"], manifest)
    run = run_objective(_objective_config(args, config))
    attach_subjective(run, scores)
    summary = run_correlation(run, scores, records)
    _emit(args, "correlate", objective=run, subjective=scores, correlation=summary)
    return 0 if any(r.fad for r in run.reports) else 1


def _cmd_validate_manifest(args, config) -> int:
    manifest = load_manifest(args.manifest or config["manifest"])
    report = validate_manifest(manifest)
    for failure in report.failures:
        print(f"FAIL: {failure}")
    for warning in report.warnings:
        print(f"warn: {warning}")
    print(
        f"{'PASS' if report.ok else 'FAIL'}: {len(manifest.entries)} entries, "
        f"splits {report.split_counts}, {len(report.failures)} failures, "
        f"{len(report.warnings)} warnings"
    )
    return 0 if report.ok else 2


def _cmd_bias_curve(args, config) -> int:
    sizes = args.subsample_sizes or config.get("subsample_sizes") or [10, 50, 250]
    if isinstance(sizes, str):
        sizes = [int(s) for s in sizes.split(",")]
    sizes = [int(s) for s in (sizes if isinstance(sizes, list) else [sizes])]
    repeats = int(config.get("subsample_repeats", 10))
    curves = run_bias_curves(_objective_config(args, config), sizes, repeats=repeats)
    _emit(args, "bias-curve", bias_curves=curves)
    return 0


def _cmd_budget_check(args, config) -> int:
    limits = _budget_limits(config)
    files = args.files if args.files is not None else int(config.get("generated_files", 0))
    seconds = (
        args.wall_seconds
        if args.wall_seconds is not None
        else float(config.get("generation_seconds", 0.0))
    )
    ok = check_generation_budget(files, seconds, limits)
    print(
        f"{'PASS' if ok else 'FAIL'}: {files} files in {seconds:.0f}s "
        f"(need >= {limits.min_files} files within {limits.max_wall_seconds:.0f}s)"
    )
    return 0 if ok else 2


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="soundscene-eval",
        description="Text-to-audio sound-scene evaluation pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--reference", help="reference audio directory")
        p.add_argument("--systems", action="append", help="system audio directory (repeatable or comma-separated)")
        p.add_argument("--backend", help="mock | mock:<rate> | external:<command template>")
        p.add_argument("--embeddings-dir", help="cache directory for .aemb files")
        p.add_argument("--ratings", help="ratings CSV path")
        p.add_argument("--manifest", help="dataset manifest CSV path")
        p.add_argument("--out", help="output directory for report.json + CSVs")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--subsample-sizes", help="comma-separated sizes for bias curves")
        return p

    add("objective", _cmd_objective, "FAD-score system directories against a reference")
    add("subjective", _cmd_subjective, "aggregate a ratings CSV into Final Ratings")
    add("correlate", _cmd_correlate, "full pipeline: objective + subjective + correlation")
    add("validate-manifest", _cmd_validate_manifest, "check a dataset manifest")
    add("bias-curve", _cmd_bias_curve, "FAD vs evaluation-set size")
    budget = add("budget-check", _cmd_budget_check, "check the generation budget")
    budget.add_argument("--files", type=int, default=None, help="number of generated files")
    budget.add_argument("--wall-seconds", type=float, default=None, help="generation wall-clock seconds")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    config = parse_config_file(args.config) if args.config else {}
    try:
        return args.func(args, config)
    except (ValueError, OSError, KeyError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
