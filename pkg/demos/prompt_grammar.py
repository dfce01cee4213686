"""The structured prompt grammar and dataset rules.

Prompts are "<foreground> with <background> in the background" (or the
bare foreground when there is no background), drawn from a fixed
category grid; the dev split excludes two backgrounds so the eval split
keeps clean monophonic and bird-bed material unseen.
"""

from collections import Counter

from soundscene_eval import (
    BackgroundCategory,
    ForegroundCategory,
    PromptSpec,
    category_grid,
    co_occurrence,
    render_prompt,
    validate_manifest,
)
from soundscene_eval.prompts import PromptError

examples = [
    PromptSpec("d1", "a dog barking", ForegroundCategory.ANIMAL,
               BackgroundCategory.CROWD, "crowd noise"),
    PromptSpec("d2", "a jackhammer is pounding", ForegroundCategory.TOOL,
               BackgroundCategory.NONE, ""),
]
for spec in examples:
    print(f"{spec.prompt_id}: {render_prompt(spec)!r}")

try:
    PromptSpec("d3", "a car honking", ForegroundCategory.VEHICLE,
               BackgroundCategory.TRAFFIC, "traffic")
except PromptError as exc:
    print(f"rejected: {exc}")

grid = category_grid()
print(f"\nadmissible (foreground, background) pairs: {len(grid)}")
by_fg = Counter(fg.value for fg, _ in grid)
print("pairs per foreground:", dict(by_fg))

# manifest validation: the synthetic generator builds a 310-entry manifest
# obeying every rule (60 dev / 250 eval, dev without none/birds)
from soundscene_eval.synthetic import grid_manifest

manifest = grid_manifest()
report = validate_manifest(manifest)
print(f"\n310-entry manifest: ok={report.ok}, warnings={len(report.warnings)}")
print("split sizes:", report.split_counts)
print("per-foreground counts:", report.foreground_counts)
print("per-background counts:", report.background_counts)

# co-occurrence audit of a caption corpus: which combinations a training
# set actually contains (data imbalance limits controllability)
captions = [
    "a dog barks while cars pass by",
    "a dog splashing in a river",
    "engine revving near a crowd",
    "birds chirping over running water",
    "a dog barking at birds",
]
matrix = co_occurrence(
    captions,
    fg_keywords={"animal": ["dog", "birds"], "vehicle": ["car", "engine"]},
    bg_keywords={"crowd": ["crowd"], "traffic": ["cars"], "water": ["river", "water"]},
)
print("\ncaption co-occurrence (rows animal/vehicle, cols crowd/traffic/water):")
print(matrix)
