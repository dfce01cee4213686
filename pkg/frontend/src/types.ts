// Wire types of the listening-test service (JSON over HTTP).

export type Phase = 'fit' | 'quality';

export type ScoreKind = 'foreground_fit' | 'background_fit' | 'quality';

export interface SessionConfig {
    baseUrl: string;
    token?: string;  // operator export token; unused by the rater flow
}

export interface RaterCredentials {
    raterId: string;
    affiliation: string;
}

export interface SessionHandle {
    sid: string;
    n_trials: number;
}

export interface SessionStatus {
    sid: string;
    cursor: number;
    n_trials: number;
    complete: boolean;
}

export interface TrialPayload {
    index: number;
    n_trials: number;
    phase: Phase;
    prompt?: string;          // present only in the fit phase
    audio_url: string;
    scores_required: ScoreKind[];
}

export interface RatingAck {
    accepted: boolean;
    cursor: number;
}

export type Scores = Record<string, number>;
