"""Two-phase listening test: trial plans, session state, persistence.

Every rater walks the same (system, prompt) pool twice. The fit phase
shows the prompt and collects foreground/background fit scores, grouped
into sections by foreground category with per-rater section and trial
orders. The quality phase replays the same audio pool in a fresh global
shuffle, withholding prompts, for a single perceptual-quality score.
Raters never learn which system produced a trial's audio.

Submissions append to a write-ahead log (one fsynced JSON line each);
replaying the log after a crash reconstructs every session, so a rating
session can resume where it stopped.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
from dataclasses import dataclass, field
from pathlib import Path

from .prompts import DatasetManifest, PromptSpec, render_prompt
from .ratings import RatingRecord

__all__ = [
    "PHASE_FIT",
    "PHASE_QUALITY",
    "Trial",
    "TestPlan",
    "SessionState",
    "ServiceError",
    "ListeningService",
    "build_plan",
]

PHASE_FIT = "fit"
PHASE_QUALITY = "quality"


class ServiceError(Exception):
    """Protocol violation surfaced to the client as an HTTP 4xx."""

    def __init__(self, code: str, message: str, status: int = 400):
        super().__init__(message)
        self.code = code
        self.message = message
        self.status = status


@dataclass(frozen=True)
class Trial:
    index: int
    phase: str
    system_id: str
    prompt_id: str


@dataclass
class TestPlan:
    rater_id: str
    trials: list[Trial]
    section_order: list[str]  # fit-phase foreground categories, rater-specific

    @property
    def n_trials(self) -> int:
        return len(self.trials)

    def phase_trials(self, phase: str) -> list[Trial]:
        return [t for t in self.trials if t.phase == phase]


@dataclass
class SessionState:
    sid: str
    rater_id: str
    affiliation: str
    plan: TestPlan
    cursor: int = 0
    submissions: dict[int, dict] = field(default_factory=dict)

    @property
    def complete(self) -> bool:
        return self.cursor >= self.plan.n_trials


def _keyed_rng(*parts) -> random.Random:
    """Deterministic RNG from a tuple of key parts; stable across processes."""
    digest = hashlib.sha256("\x1f".join(str(p) for p in parts).encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "little"))


def build_plan(
    rater_id: str,
    items: list[tuple[str, str]],
    categories: dict[str, str],
    seed: int,
) -> TestPlan:
    """Deterministic two-phase plan for one rater.

    ``items`` are (system_id, prompt_id) pairs; ``categories`` maps
    prompt_id to its foreground category. The same (seed, rater_id)
    always yields the same plan; different raters get different section
    and trial orders.
    """
    if not items:
        raise ServiceError("empty_trial_set", "no (system, prompt) trials configured")
    sections = sorted({categories[prompt_id] for _, prompt_id in items})
    section_order = list(sections)
    _keyed_rng(seed, rater_id, PHASE_FIT, "sections").shuffle(section_order)

    trials: list[Trial] = []
    for section in section_order:
        in_section = sorted(
            item for item in items if categories[item[1]] == section
        )
        _keyed_rng(seed, rater_id, PHASE_FIT, section).shuffle(in_section)
        for system_id, prompt_id in in_section:
            trials.append(Trial(len(trials), PHASE_FIT, system_id, prompt_id))

    quality_items = sorted(items)
    _keyed_rng(seed, rater_id, PHASE_QUALITY).shuffle(quality_items)
    for system_id, prompt_id in quality_items:
        trials.append(Trial(len(trials), PHASE_QUALITY, system_id, prompt_id))
    return TestPlan(rater_id=rater_id, trials=trials, section_order=section_order)


class ListeningService:
    """Schedules trials, streams audio, and persists ratings.

    ``systems`` maps system ids to directories holding one
    ``<prompt_id>.wav`` per prompt the system rendered; a (system, prompt)
    trial exists iff that file does. Including the reference set as just
    another entry keeps it anonymous like any submission.
    """

    def __init__(
        self,
        manifest: DatasetManifest,
        systems: dict[str, str | Path],
        seed: int,
        log_path: str | Path,
    ):
        self.manifest = manifest
        self.seed = seed
        self.log_path = Path(log_path)
        self._prompts: dict[str, PromptSpec] = {
            entry.prompt.prompt_id: entry.prompt for entry in manifest.entries
        }
        self._audio: dict[tuple[str, str], Path] = {}
        for system_id in sorted(systems):
            directory = Path(systems[system_id])
            for prompt_id in sorted(self._prompts):
                wav = directory / f"{prompt_id}.wav"
                if wav.exists():
                    self._audio[(system_id, prompt_id)] = wav
        self._items = sorted(self._audio)
        self._categories = {
            prompt_id: prompt.foreground_category.value
            for prompt_id, prompt in self._prompts.items()
        }
        self.sessions: dict[str, SessionState] = {}
        self._rater_sid: dict[str, str] = {}
        self._log_handle = None
        if self.log_path.exists():
            self._replay()

    # -- persistence ------------------------------------------------------

    def _append_log(self, event: dict) -> None:
        if self._log_handle is None:
            self.log_path.parent.mkdir(parents=True, exist_ok=True)
            self._log_handle = open(self.log_path, "a", encoding="utf-8")
        self._log_handle.write(json.dumps(event, sort_keys=True) + "\n")
        self._log_handle.flush()
        os.fsync(self._log_handle.fileno())

    def _replay(self) -> None:
        for line in self.log_path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            event = json.loads(line)
            if event["event"] == "session":
                self._open_session(event["rater_id"], event["affiliation"])
            elif event["event"] == "rating":
                session = self.sessions[event["sid"]]
                self._apply_rating(session, event["index"], event["scores"], event["played"])

    def close(self) -> None:
        if self._log_handle is not None:
            self._log_handle.close()
            self._log_handle = None

    # -- session lifecycle -------------------------------------------------

    def create_session(self, rater_id: str, affiliation: str) -> SessionState:
        if not rater_id:
            raise ServiceError("bad_rater", "rater_id must be non-empty")
        if rater_id in self._rater_sid:
            raise ServiceError(
                "session_exists", f"rater {rater_id!r} already has a session", status=409
            )
        session = self._open_session(rater_id, affiliation)
        self._append_log(
            {"event": "session", "sid": session.sid, "rater_id": rater_id,
             "affiliation": affiliation}
        )
        return session

    def _open_session(self, rater_id: str, affiliation: str) -> SessionState:
        plan = build_plan(rater_id, self._items, self._categories, self.seed)
        sid = "s" + hashlib.sha256(f"{self.seed}\x1f{rater_id}".encode()).hexdigest()[:12]
        session = SessionState(sid=sid, rater_id=rater_id, affiliation=affiliation, plan=plan)
        self.sessions[sid] = session
        self._rater_sid[rater_id] = sid
        return session

    def _session(self, sid: str) -> SessionState:
        if sid not in self.sessions:
            raise ServiceError("unknown_session", f"no session {sid!r}", status=404)
        return self.sessions[sid]

    def session_status(self, sid: str) -> dict:
        session = self._session(sid)
        return {
            "sid": session.sid,
            "cursor": session.cursor,
            "n_trials": session.plan.n_trials,
            "complete": session.complete,
        }

    # -- trials ------------------------------------------------------------

    def _trial_at(self, session: SessionState, index: int) -> Trial:
        if session.complete:
            raise ServiceError("session_complete", "all trials already rated", status=409)
        if index != session.cursor:
            raise ServiceError(
                "out_of_order",
                f"trial {index} is not the next trial (cursor at {session.cursor})",
                status=409,
            )
        return session.plan.trials[index]

    def required_scores(self, trial: Trial) -> list[str]:
        if trial.phase == PHASE_QUALITY:
            return ["quality"]
        prompt = self._prompts[trial.prompt_id]
        return ["foreground_fit", "background_fit"] if prompt.has_background else ["foreground_fit"]

    def get_trial(self, sid: str, index: int) -> dict:
        """Trial payload for the rater; never includes the system identity."""
        session = self._session(sid)
        trial = self._trial_at(session, index)
        payload = {
            "index": trial.index,
            "n_trials": session.plan.n_trials,
            "phase": trial.phase,
            "audio_url": f"/session/{sid}/trial/{index}/audio",
            "scores_required": self.required_scores(trial),
        }
        if trial.phase == PHASE_FIT:
            payload["prompt"] = render_prompt(self._prompts[trial.prompt_id])
        return payload

    def trial_audio(self, sid: str, index: int) -> bytes:
        session = self._session(sid)
        trial = self._trial_at(session, index)
        return self._audio[(trial.system_id, trial.prompt_id)].read_bytes()

    def submit_rating(self, sid: str, index: int, scores: dict, played: bool = False) -> dict:
        session = self._session(sid)
        trial = self._trial_at(session, index)
        if index in session.submissions:
            raise ServiceError("duplicate", f"trial {index} already rated", status=409)
        required = self.required_scores(trial)
        if sorted(scores) != sorted(required):
            raise ServiceError(
                "bad_scores",
                f"expected exactly scores {required}, got {sorted(scores)}",
            )
        for kind, value in scores.items():
            if isinstance(value, bool) or not isinstance(value, int):
                raise ServiceError("bad_scores", f"{kind} must be an integer, got {value!r}")
            if not 0 <= value <= 10:
                raise ServiceError("bad_scores", f"{kind} must be in 0..10, got {value}")
        self._append_log(
            {"event": "rating", "sid": sid, "index": index, "scores": scores,
             "played": bool(played)}
        )
        self._apply_rating(session, index, scores, bool(played))
        return {"accepted": True, "cursor": session.cursor}

    def _apply_rating(self, session: SessionState, index: int, scores: dict, played: bool) -> None:
        session.submissions[index] = {"scores": dict(scores), "played": played}
        session.cursor = index + 1

    # -- export -------------------------------------------------------------

    def export_records(self, include_partial: bool = False) -> list[RatingRecord]:
        """Merge fit + quality submissions into rating records.

        Complete sessions only by default. With ``include_partial``,
        (system, prompt) pairs that have both their fit and quality
        submissions are included even from unfinished sessions.
        """
        records = []
        for sid in sorted(self.sessions):
            session = self.sessions[sid]
            if not session.complete and not include_partial:
                continue
            fit: dict[tuple[str, str], dict] = {}
            quality: dict[tuple[str, str], dict] = {}
            for trial in session.plan.trials:
                submission = session.submissions.get(trial.index)
                if submission is None:
                    continue
                key = (trial.system_id, trial.prompt_id)
                (fit if trial.phase == PHASE_FIT else quality)[key] = submission["scores"]
            for key in sorted(fit):
                if key not in quality:
                    continue
                system_id, prompt_id = key
                records.append(
                    RatingRecord(
                        rater_id=session.rater_id,
                        rater_affiliation=session.affiliation,
                        system_id=system_id,
                        prompt_id=prompt_id,
                        foreground_fit=float(fit[key]["foreground_fit"]),
                        background_fit=(
                            float(fit[key]["background_fit"])
                            if "background_fit" in fit[key]
                            else None
                        ),
                        quality=float(quality[key]["quality"]),
                    )
                )
        return records
