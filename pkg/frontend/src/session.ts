// Session controller: owns the sid, the server cursor, and the strictly
// linear walk through both phases. Progress only ever advances on a
// server acknowledgement; on reload the stored sid resumes at whatever
// cursor the server reports.

import { ListenClient, ServerRejection } from './api.js';
import { RaterCredentials, Scores, SessionStatus, TrialPayload } from './types.js';

export interface StorageLike {
    getItem(key: string): string | null;
    setItem(key: string, value: string): void;
    removeItem(key: string): void;
}

const STORAGE_KEY = 'soundscene-listen-sid';

export class SessionController {
    private sid = '';
    private cursorValue = 0;
    private totalTrials = 0;

    constructor(
        readonly client: ListenClient,
        private readonly storage: StorageLike,
        private readonly storageKey: string = STORAGE_KEY,
    ) {}

    get cursor(): number {
        return this.cursorValue;
    }

    get nTrials(): number {
        return this.totalTrials;
    }

    get complete(): boolean {
        return this.totalTrials > 0 && this.cursorValue >= this.totalTrials;
    }

    /** Resume the stored session if the server still knows it, else create one. */
    async start(credentials: RaterCredentials): Promise<SessionStatus> {
        const stored = this.storage.getItem(this.storageKey);
        if (stored) {
            try {
                const status = await this.client.status(stored);
                this.adopt(status);
                return status;
            } catch (error) {
                if (!(error instanceof ServerRejection && error.status === 404)) {
                    throw error;
                }
                this.storage.removeItem(this.storageKey);
            }
        }
        const handle = await this.client.createSession(credentials);
        this.sid = handle.sid;
        this.totalTrials = handle.n_trials;
        this.cursorValue = 0;
        this.storage.setItem(this.storageKey, handle.sid);
        return { sid: handle.sid, cursor: 0, n_trials: handle.n_trials, complete: false };
    }

    private adopt(status: SessionStatus): void {
        this.sid = status.sid;
        this.cursorValue = status.cursor;
        this.totalTrials = status.n_trials;
    }

    currentTrial(): Promise<TrialPayload> {
        return this.client.trial(this.sid, this.cursorValue);
    }

    audioUrl(trial: TrialPayload): string {
        return this.client.audioUrl(trial.audio_url);
    }

    /** Submit the current trial's scores; the cursor moves to the acked value. */
    async submit(scores: Scores, played: boolean): Promise<number> {
        const ack = await this.client.submitRating(this.sid, this.cursorValue, scores, played);
        this.cursorValue = ack.cursor;
        return ack.cursor;
    }
}
