// @vitest-environment happy-dom
//
// Session walkthrough against the scripted service: rendering per phase,
// the playback-and-scores submit gate, server-cursor resume on reload,
// and verbatim server rejections.

import { beforeEach, describe, expect, it } from 'vitest';

import { ListenClient } from '../src/api.js';
import { SessionController } from '../src/session.js';
import { SessionView } from '../src/ui.js';
import {
    FIT_NO_BG,
    FIT_WITH_BG,
    MemoryStorage,
    QUALITY,
    ScriptedService,
    ScriptedTrial,
} from './scripted.js';

const tick = () => new Promise(resolve => setTimeout(resolve, 0));

function harness(trials: ScriptedTrial[], storage = new MemoryStorage()) {
    const service = new ScriptedService(trials);
    const client = new ListenClient(
        { baseUrl: 'http://svc' },
        { fetchFn: service.fetch, delayFn: async () => {}, maxAttempts: 2 },
    );
    const controller = new SessionController(client, storage);
    const root = document.createElement('div');
    document.body.appendChild(root);
    const view = new SessionView(controller, root);
    return { service, controller, root, view, storage };
}

function scoreRows(root: HTMLElement): HTMLElement[] {
    return [...root.querySelectorAll<HTMLElement>('.score-row')];
}

function pickScore(root: HTMLElement, kind: string, value: number): void {
    const row = scoreRows(root).find(r => r.dataset.kind === kind)!;
    row.querySelectorAll<HTMLButtonElement>('.score-button')[value].click();
}

function finishPlayback(root: HTMLElement): void {
    root.querySelector('.trial-audio')!.dispatchEvent(new Event('ended'));
}

function submitButton(root: HTMLElement): HTMLButtonElement {
    return root.querySelector<HTMLButtonElement>('.submit-button')!;
}

describe('trial rendering', () => {
    it('fit trial with background renders two labeled inputs', async () => {
        const { root, view } = harness([FIT_WITH_BG, QUALITY]);
        await view.run({ raterId: 'r1', affiliation: 'organizer' });

        expect(root.querySelector('.prompt')!.textContent).toBe(
            'a dog barking with crowd noise in the background',
        );
        const rows = scoreRows(root);
        expect(rows.map(r => r.dataset.kind)).toEqual(['foreground_fit', 'background_fit']);
        expect(rows.map(r => r.querySelector('legend')!.textContent)).toEqual([
            'foreground match', 'background match',
        ]);
        // 11 discrete steps with captioned endpoints
        for (const row of rows) {
            expect(row.querySelectorAll('.score-button')).toHaveLength(11);
            expect(row.querySelector('.endpoint-low')!.textContent).toBe('extremely poor');
            expect(row.querySelector('.endpoint-high')!.textContent).toBe('extremely good');
        }
    });

    it('no-background fit trial renders a single foreground input', async () => {
        const { root, view } = harness([FIT_NO_BG, QUALITY]);
        await view.run({ raterId: 'r1', affiliation: 'organizer' });
        expect(scoreRows(root).map(r => r.dataset.kind)).toEqual(['foreground_fit']);
    });

    it('quality trial renders one input and no prompt', async () => {
        const { root, view } = harness([QUALITY, QUALITY]);
        await view.run({ raterId: 'r1', affiliation: 'organizer' });
        expect(root.querySelector('.prompt')).toBeNull();
        expect(scoreRows(root).map(r => r.dataset.kind)).toEqual(['quality']);
        expect(root.querySelector('.phase')!.textContent).toContain('quality');
    });

    it('never shows a system identity anywhere', async () => {
        const { root, view, service } = harness([FIT_WITH_BG, FIT_NO_BG, QUALITY, QUALITY]);
        await view.run({ raterId: 'r1', affiliation: 'sysA' });
        while (!root.querySelector('.complete')) {
            expect(root.innerHTML).not.toContain('sysA');
            expect(root.innerHTML).not.toContain('sysB');
            for (const kind of scoreRows(root).map(r => r.dataset.kind!)) {
                pickScore(root, kind, 7);
            }
            finishPlayback(root);
            submitButton(root).click();
            await tick();
        }
        expect(service.submissions).toHaveLength(4);
    });
});

describe('submit gate', () => {
    it('stays disabled until playback completed AND all scores picked', async () => {
        const { root, view } = harness([FIT_WITH_BG, QUALITY]);
        await view.run({ raterId: 'r1', affiliation: 'organizer' });

        expect(submitButton(root).disabled).toBe(true);
        pickScore(root, 'foreground_fit', 7);
        pickScore(root, 'background_fit', 5);
        expect(submitButton(root).disabled).toBe(true);  // not played yet
        finishPlayback(root);
        expect(submitButton(root).disabled).toBe(false);
    });

    it('playback alone does not unlock submission', async () => {
        const { root, view } = harness([FIT_WITH_BG, QUALITY]);
        await view.run({ raterId: 'r1', affiliation: 'organizer' });
        finishPlayback(root);
        expect(submitButton(root).disabled).toBe(true);
        pickScore(root, 'foreground_fit', 3);
        expect(submitButton(root).disabled).toBe(true);  // background still unset
        pickScore(root, 'background_fit', 4);
        expect(submitButton(root).disabled).toBe(false);
    });

    it('submits exactly the required kinds and advances on the ack', async () => {
        const { root, view, service } = harness([FIT_WITH_BG, QUALITY]);
        await view.run({ raterId: 'r1', affiliation: 'organizer' });
        pickScore(root, 'foreground_fit', 7);
        pickScore(root, 'background_fit', 5);
        finishPlayback(root);
        submitButton(root).click();
        await tick();

        expect(service.submissions).toEqual([
            {
                sid: 'sid-1', index: 0, played: true,
                scores: { foreground_fit: 7, background_fit: 5 },
            },
        ]);
        // progress now mirrors the server cursor
        expect(root.querySelector('.progress')!.textContent).toBe('Trial 2 of 2');
        expect(scoreRows(root).map(r => r.dataset.kind)).toEqual(['quality']);
    });

    it('renders the completion screen after the last ack', async () => {
        const { root, view } = harness([QUALITY]);
        await view.run({ raterId: 'r1', affiliation: 'organizer' });
        pickScore(root, 'quality', 9);
        finishPlayback(root);
        submitButton(root).click();
        await tick();
        expect(root.querySelector('.complete')).not.toBeNull();
        expect(root.querySelector('.submit-button')).toBeNull();
    });
});

describe('resume on reload', () => {
    it('a fresh view with the same storage resumes at the server cursor', async () => {
        const storage = new MemoryStorage();
        const first = harness([FIT_WITH_BG, FIT_NO_BG, QUALITY, QUALITY], storage);
        await first.view.run({ raterId: 'r1', affiliation: 'organizer' });
        pickScore(first.root, 'foreground_fit', 6);
        pickScore(first.root, 'background_fit', 6);
        finishPlayback(first.root);
        submitButton(first.root).click();
        await tick();
        expect(first.service.cursorOf('sid-1')).toBe(1);

        // "reload": same scripted service and storage, brand-new DOM + objects
        const client = new ListenClient(
            { baseUrl: 'http://svc' },
            { fetchFn: first.service.fetch, delayFn: async () => {} },
        );
        const controller = new SessionController(client, storage);
        const root = document.createElement('div');
        document.body.appendChild(root);
        const view = new SessionView(controller, root);
        await view.run({ raterId: 'r1', affiliation: 'organizer' });

        expect(controller.cursor).toBe(1);
        expect(root.querySelector('.progress')!.textContent).toBe('Trial 2 of 4');
        expect(root.querySelector('.prompt')!.textContent).toBe('a jackhammer is pounding');
    });

    it('a completed session resumes straight to the completion screen', async () => {
        const storage = new MemoryStorage();
        const first = harness([QUALITY], storage);
        await first.view.run({ raterId: 'r1', affiliation: 'organizer' });
        pickScore(first.root, 'quality', 2);
        finishPlayback(first.root);
        submitButton(first.root).click();
        await tick();

        const again = harness([QUALITY], storage);
        // reuse the original service so the session is known
        const client = new ListenClient(
            { baseUrl: 'http://svc' },
            { fetchFn: first.service.fetch, delayFn: async () => {} },
        );
        const controller = new SessionController(client, storage);
        const view = new SessionView(controller, again.root);
        await view.run({ raterId: 'r1', affiliation: 'organizer' });
        expect(again.root.querySelector('.complete')).not.toBeNull();
    });
});

describe('server rejections', () => {
    it('surfaces the server message verbatim and keeps the trial', async () => {
        const { root, view, service } = harness([FIT_NO_BG, QUALITY]);
        await view.run({ raterId: 'r1', affiliation: 'organizer' });
        // force a rejection: sneak the cursor forward behind the UI's back
        await service.fetch('http://svc/session/sid-1/trial/0/rating', {
            method: 'POST',
            body: JSON.stringify({ scores: { foreground_fit: 1 }, played: true }),
        });
        pickScore(root, 'foreground_fit', 8);
        finishPlayback(root);
        submitButton(root).click();
        await tick();
        expect(root.querySelector('.error-banner')!.textContent).toBe(
            'trial 0 is not the next trial',
        );
    });
});
