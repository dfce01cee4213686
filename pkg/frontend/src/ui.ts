// Trial rendering and the submit gate.
//
// One sound per trial: the rater must hear the audio to the end at least
// once and pick every required score before the submit control unlocks.
// The audio element is never given native controls, so replay is a
// button and scrubbing is impossible. Nothing rendered here ever names
// the system behind a trial; the service never sends it.

import { NetworkGaveUp, ServerRejection } from './api.js';
import { SessionController } from './session.js';
import { RaterCredentials, Scores, TrialPayload } from './types.js';

const KIND_LABELS: Record<string, string> = {
    foreground_fit: 'foreground match',
    background_fit: 'background match',
    quality: 'quality',
};

const PHASE_BLURBS: Record<string, string> = {
    fit: 'Rate how well the sound matches the prompt.',
    quality: 'Rate the perceptual quality of the sound, regardless of content.',
};

export class SessionView {
    private readonly doc: Document;
    private playedOnce = false;
    private picked: Scores = {};
    private trial: TrialPayload | null = null;

    constructor(
        private readonly controller: SessionController,
        private readonly root: HTMLElement,
    ) {
        this.doc = root.ownerDocument;
    }

    /** Entry point: create or resume the session, then walk the trials. */
    async run(credentials: RaterCredentials): Promise<void> {
        try {
            await this.controller.start(credentials);
        } catch (error) {
            this.renderFatal(error, () => this.run(credentials));
            return;
        }
        await this.showCurrent();
    }

    private async showCurrent(): Promise<void> {
        if (this.controller.complete) {
            this.renderComplete();
            return;
        }
        let trial: TrialPayload;
        try {
            trial = await this.controller.currentTrial();
        } catch (error) {
            this.renderFatal(error, () => this.showCurrent());
            return;
        }
        this.renderTrial(trial);
    }

    private element<K extends keyof HTMLElementTagNameMap>(
        tag: K, className: string, text?: string,
    ): HTMLElementTagNameMap[K] {
        const node = this.doc.createElement(tag);
        node.className = className;
        if (text !== undefined) {
            node.textContent = text;
        }
        return node;
    }

    private renderTrial(trial: TrialPayload): void {
        this.trial = trial;
        this.playedOnce = false;
        this.picked = {};
        this.root.textContent = '';

        const pane = this.element('div', 'trial');
        pane.appendChild(this.element(
            'div', 'progress', `Trial ${trial.index + 1} of ${trial.n_trials}`,
        ));
        pane.appendChild(this.element('div', 'phase', PHASE_BLURBS[trial.phase] ?? trial.phase));
        if (trial.prompt !== undefined) {
            pane.appendChild(this.element('p', 'prompt', trial.prompt));
        }
        pane.appendChild(this.buildPlayer(trial));
        const scorePane = this.element('div', 'scores');
        for (const kind of trial.scores_required) {
            scorePane.appendChild(this.buildScoreRow(kind));
        }
        pane.appendChild(scorePane);

        const submit = this.element('button', 'submit-button', 'Submit rating');
        submit.disabled = true;
        submit.addEventListener('click', () => void this.submit());
        pane.appendChild(submit);
        pane.appendChild(this.element('div', 'error-banner'));

        this.root.appendChild(pane);
    }

    private buildPlayer(trial: TrialPayload): HTMLElement {
        const player = this.element('div', 'player');
        const audio = this.doc.createElement('audio');
        audio.className = 'trial-audio';
        audio.preload = 'auto';
        audio.src = this.controller.audioUrl(trial);
        // no `controls` attribute: replay goes through the button below,
        // seeking is not offered
        audio.addEventListener('ended', () => {
            this.playedOnce = true;
            played.textContent = 'heard in full';
            button.textContent = 'Replay';
            this.refreshGate();
        });
        const button = this.element('button', 'play-button', 'Play');
        button.addEventListener('click', () => {
            audio.currentTime = 0;
            void Promise.resolve(audio.play()).catch(() => {
                /* autoplay restrictions surface on the next click */
            });
        });
        const played = this.element('span', 'played-indicator', 'not played yet');
        player.append(audio, button, played);
        return player;
    }

    private buildScoreRow(kind: string): HTMLElement {
        const row = this.element('fieldset', 'score-row');
        row.dataset.kind = kind;
        const legend = this.doc.createElement('legend');
        legend.textContent = KIND_LABELS[kind] ?? kind;
        row.appendChild(legend);
        row.appendChild(this.element('span', 'endpoint endpoint-low', 'extremely poor'));
        for (let value = 0; value <= 10; value++) {
            const button = this.element('button', 'score-button', String(value));
            button.dataset.value = String(value);
            button.addEventListener('click', () => {
                this.picked[kind] = value;
                for (const sibling of row.querySelectorAll('.score-button')) {
                    sibling.classList.toggle('selected', sibling === button);
                }
                this.refreshGate();
            });
            row.appendChild(button);
        }
        row.appendChild(this.element('span', 'endpoint endpoint-high', 'extremely good'));
        return row;
    }

    private refreshGate(): void {
        const submit = this.root.querySelector<HTMLButtonElement>('.submit-button');
        if (!submit || !this.trial) {
            return;
        }
        const allPicked = this.trial.scores_required.every(
            kind => this.picked[kind] !== undefined,
        );
        submit.disabled = !(this.playedOnce && allPicked);
    }

    private async submit(): Promise<void> {
        const submit = this.root.querySelector<HTMLButtonElement>('.submit-button');
        const banner = this.root.querySelector<HTMLElement>('.error-banner');
        if (!submit || !this.trial) {
            return;
        }
        submit.disabled = true;
        try {
            await this.controller.submit({ ...this.picked }, this.playedOnce);
        } catch (error) {
            if (error instanceof ServerRejection) {
                // the server's own words, verbatim
                if (banner) banner.textContent = error.message;
                this.refreshGate();
                return;
            }
            if (error instanceof NetworkGaveUp) {
                if (banner) {
                    banner.textContent = 'Connection lost; your scores are kept.';
                    const retry = this.element('button', 'retry-button', 'Retry');
                    retry.addEventListener('click', () => void this.submit());
                    banner.appendChild(retry);
                }
                return;
            }
            throw error;
        }
        await this.showCurrent();
    }

    private renderComplete(): void {
        this.root.textContent = '';
        const done = this.element('div', 'complete');
        done.appendChild(this.element(
            'p', 'thanks', 'All trials rated. Thank you for listening!',
        ));
        done.appendChild(this.element(
            'div', 'progress',
            `Trial ${this.controller.nTrials} of ${this.controller.nTrials}`,
        ));
        this.root.appendChild(done);
    }

    private renderFatal(error: unknown, retry: () => void): void {
        this.root.textContent = '';
        const pane = this.element('div', 'fatal');
        const message = error instanceof Error ? error.message : String(error);
        pane.appendChild(this.element('p', 'error-banner', message));
        const button = this.element('button', 'retry-button', 'Retry');
        button.addEventListener('click', retry);
        pane.appendChild(button);
        this.root.appendChild(pane);
    }
}
