// In-memory stand-in for the listening service, faithful to its
// protocol: linear cursor, exact score-kind matching, integer 0-10
// validation, prompt only in fit-phase payloads, no system identity on
// the wire.

import { StorageLike } from '../src/session.js';
import { Scores } from '../src/types.js';

export interface ScriptedTrial {
    phase: 'fit' | 'quality';
    prompt?: string;
    scores_required: string[];
    system: string; // known to the script only; never serialized
}

export interface Submission {
    sid: string;
    index: number;
    scores: Scores;
    played: boolean;
}

const json = (body: unknown, status = 200): Response =>
    new Response(JSON.stringify(body), {
        status,
        headers: { 'content-type': 'application/json' },
    });

export class ScriptedService {
    readonly submissions: Submission[] = [];
    private readonly cursors = new Map<string, number>();
    private readonly sidByRater = new Map<string, string>();
    requests = 0;

    constructor(readonly trials: ScriptedTrial[]) {}

    cursorOf(sid: string): number {
        return this.cursors.get(sid) ?? 0;
    }

    fetch = async (url: string, init?: RequestInit): Promise<Response> => {
        this.requests += 1;
        const path = url.replace(/^https?:\/\/[^/]+/, '');
        const body = init?.body ? JSON.parse(String(init.body)) : undefined;

        if (path === '/session' && init?.method === 'POST') {
            const rater = body.rater_id as string;
            if (this.sidByRater.has(rater)) {
                return json({ code: 'session_exists', message: `rater '${rater}' already has a session` }, 409);
            }
            const sid = `sid-${this.sidByRater.size + 1}`;
            this.sidByRater.set(rater, sid);
            this.cursors.set(sid, 0);
            return json({ sid, n_trials: this.trials.length });
        }

        let match = path.match(/^\/session\/([^/]+)\/trial\/(\d+)\/rating$/);
        if (match && init?.method === 'POST') {
            return this.rate(match[1], Number(match[2]), body);
        }
        match = path.match(/^\/session\/([^/]+)\/trial\/(\d+)$/);
        if (match) {
            return this.trial(match[1], Number(match[2]));
        }
        match = path.match(/^\/session\/([^/]+)$/);
        if (match) {
            if (!this.cursors.has(match[1])) {
                return json({ code: 'unknown_session', message: `no session '${match[1]}'` }, 404);
            }
            const cursor = this.cursorOf(match[1]);
            return json({
                sid: match[1], cursor, n_trials: this.trials.length,
                complete: cursor >= this.trials.length,
            });
        }
        return json({ code: 'not_found', message: `no route ${path}` }, 404);
    };

    private trial(sid: string, index: number): Response {
        if (!this.cursors.has(sid)) {
            return json({ code: 'unknown_session', message: `no session '${sid}'` }, 404);
        }
        if (index !== this.cursorOf(sid)) {
            return json({ code: 'out_of_order', message: `trial ${index} is not the next trial` }, 409);
        }
        const trial = this.trials[index];
        const payload: Record<string, unknown> = {
            index,
            n_trials: this.trials.length,
            phase: trial.phase,
            audio_url: `/session/${sid}/trial/${index}/audio`,
            scores_required: trial.scores_required,
        };
        if (trial.phase === 'fit') {
            payload.prompt = trial.prompt;
        }
        return json(payload);
    }

    private rate(sid: string, index: number, body: { scores: Scores; played: boolean }): Response {
        if (index !== this.cursorOf(sid)) {
            return json({ code: 'out_of_order', message: `trial ${index} is not the next trial` }, 409);
        }
        const required = [...this.trials[index].scores_required].sort();
        const got = Object.keys(body.scores).sort();
        if (JSON.stringify(required) !== JSON.stringify(got)) {
            return json({ code: 'bad_scores', message: `expected exactly scores ${required}` }, 400);
        }
        for (const value of Object.values(body.scores)) {
            if (!Number.isInteger(value) || value < 0 || value > 10) {
                return json({ code: 'bad_scores', message: `score ${value} out of 0..10` }, 400);
            }
        }
        this.submissions.push({ sid, index, scores: body.scores, played: body.played });
        this.cursors.set(sid, index + 1);
        return json({ accepted: true, cursor: index + 1 });
    }
}

export class MemoryStorage implements StorageLike {
    private readonly data = new Map<string, string>();

    getItem(key: string): string | null {
        return this.data.has(key) ? this.data.get(key)! : null;
    }

    setItem(key: string, value: string): void {
        this.data.set(key, value);
    }

    removeItem(key: string): void {
        this.data.delete(key);
    }
}

export const FIT_WITH_BG: ScriptedTrial = {
    phase: 'fit',
    prompt: 'a dog barking with crowd noise in the background',
    scores_required: ['foreground_fit', 'background_fit'],
    system: 'sysA',
};

export const FIT_NO_BG: ScriptedTrial = {
    phase: 'fit',
    prompt: 'a jackhammer is pounding',
    scores_required: ['foreground_fit'],
    system: 'sysB',
};

export const QUALITY: ScriptedTrial = {
    phase: 'quality',
    scores_required: ['quality'],
    system: 'sysA',
};
