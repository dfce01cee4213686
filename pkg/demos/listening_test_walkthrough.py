"""A scripted rater walking the two-phase listening test.

Creates the service against a small submission tree, plays through a few
fit trials (prompt shown, foreground/background scores) and quality
trials (no prompt, one score), crashes the service halfway, replays the
log, finishes, and exports the ratings CSV. To serve the same thing over
HTTP:

    soundscene-listen --manifest manifest.csv --systems-root audio/ \
        --log ratings.log --token SECRET
"""

import tempfile
from pathlib import Path

from soundscene_eval.listening import ListeningService
from soundscene_eval.ratings import write_ratings_csv
from soundscene_eval.synthetic import compact_manifest, listening_tree

root = Path(tempfile.mkdtemp(prefix="soundscene-listen-"))
manifest = compact_manifest(2)  # 12 prompts over the six foreground categories
systems = listening_tree(root / "audio", manifest, {"sysA": None, "sysB": None})
log_path = root / "ratings.log"

service = ListeningService(manifest, systems, seed=11, log_path=log_path)
session = service.create_session("rater-7", "organizer")
print(f"session {session.sid}: {session.plan.n_trials} trials "
      f"({len(session.plan.phase_trials('fit'))} per phase)")
print(f"fit sections in this rater's order: {session.plan.section_order}\n")

shown = 0
while not session.complete:
    payload = service.get_trial(session.sid, session.cursor)
    if shown < 3 or payload["phase"] == "quality" and shown < 16:
        prompt = payload.get("prompt", "(withheld)")
        print(f"trial {payload['index']:>2} [{payload['phase']:>7}] "
              f"needs {payload['scores_required']}  prompt: {prompt}")
        shown += 1
    scores = {kind: (payload["index"] + 5) % 11 for kind in payload["scores_required"]}
    service.submit_rating(session.sid, session.cursor, scores, played=True)
    if session.cursor == session.plan.n_trials // 2:
        service.close()
        service = ListeningService(manifest, systems, seed=11, log_path=log_path)
        session = service.sessions[session.sid]
        print(f"\n-- service restarted mid-test; log replay puts the cursor "
              f"back at {session.cursor} --\n")

records = service.export_records()
csv_path = root / "ratings.csv"
write_ratings_csv(records, csv_path)
print(f"session complete; exported {len(records)} rating records")
print(f"ratings CSV at {csv_path}:")
print("\n".join(csv_path.read_text().splitlines()[:4]))
print("  ...")
