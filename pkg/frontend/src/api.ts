// HTTP client for the listening service: plain fetch with retry/backoff
// on network failure. Server rejections (4xx) are NOT retried; their
// message is surfaced verbatim for the rater to see.

import {
    RaterCredentials,
    RatingAck,
    Scores,
    SessionConfig,
    SessionHandle,
    SessionStatus,
    TrialPayload,
} from './types.js';

export class ServerRejection extends Error {
    constructor(readonly status: number, readonly code: string, message: string) {
        super(message);
        this.name = 'ServerRejection';
    }
}

export class NetworkGaveUp extends Error {
    constructor(readonly attempts: number, readonly cause: unknown) {
        super(`network request failed after ${attempts} attempts`);
        this.name = 'NetworkGaveUp';
    }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

const sleep = (ms: number) => new Promise<void>(resolve => setTimeout(resolve, ms));

export interface ClientOptions {
    fetchFn?: FetchLike;
    delayFn?: (ms: number) => Promise<void>;
    maxAttempts?: number;
    backoffBaseMs?: number;
}

export class ListenClient {
    private readonly fetchFn: FetchLike;
    private readonly delayFn: (ms: number) => Promise<void>;
    private readonly maxAttempts: number;
    private readonly backoffBaseMs: number;

    constructor(readonly config: SessionConfig, options: ClientOptions = {}) {
        // bind in case the host object matters (window.fetch)
        const rawFetch = options.fetchFn ?? fetch.bind(globalThis);
        this.fetchFn = rawFetch;
        this.delayFn = options.delayFn ?? sleep;
        this.maxAttempts = options.maxAttempts ?? 4;
        this.backoffBaseMs = options.backoffBaseMs ?? 500;
    }

    audioUrl(path: string): string {
        return this.config.baseUrl + path;
    }

    createSession(credentials: RaterCredentials): Promise<SessionHandle> {
        return this.request<SessionHandle>('/session', {
            method: 'POST',
            headers: { 'content-type': 'application/json' },
            body: JSON.stringify({
                rater_id: credentials.raterId,
                affiliation: credentials.affiliation,
            }),
        });
    }

    status(sid: string): Promise<SessionStatus> {
        return this.request<SessionStatus>(`/session/${sid}`);
    }

    trial(sid: string, index: number): Promise<TrialPayload> {
        return this.request<TrialPayload>(`/session/${sid}/trial/${index}`);
    }

    submitRating(sid: string, index: number, scores: Scores, played: boolean): Promise<RatingAck> {
        return this.request<RatingAck>(`/session/${sid}/trial/${index}/rating`, {
            method: 'POST',
            headers: { 'content-type': 'application/json' },
            body: JSON.stringify({ scores, played }),
        });
    }

    private async request<T>(path: string, init?: RequestInit): Promise<T> {
        let failure: unknown = null;
        for (let attempt = 1; attempt <= this.maxAttempts; attempt++) {
            let response: Response;
            try {
                response = await this.fetchFn(this.config.baseUrl + path, init);
            } catch (error) {
                // fetch throws only on network-level trouble; back off and retry
                failure = error;
                if (attempt < this.maxAttempts) {
                    await this.delayFn(this.backoffBaseMs * 2 ** (attempt - 1));
                }
                continue;
            }
            if (!response.ok) {
                const body = await response.json().catch(() => ({}));
                throw new ServerRejection(
                    response.status,
                    typeof body.code === 'string' ? body.code : 'error',
                    typeof body.message === 'string' ? body.message : `HTTP ${response.status}`,
                );
            }
            return response.json() as Promise<T>;
        }
        throw new NetworkGaveUp(this.maxAttempts, failure);
    }
}
