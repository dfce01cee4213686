// Bootstrapping: read the server config, collect rater credentials, run.
//
// Configuration is the server base URL (same origin by default, or
// ?server=http://host:port) plus an optional operator token; the rater
// flow itself never sends the token.

import { ListenClient } from './api.js';
import { SessionController } from './session.js';
import { SessionView } from './ui.js';
import { SessionConfig } from './types.js';

function readConfig(): SessionConfig {
    const params = new URLSearchParams(window.location.search);
    return {
        baseUrl: params.get('server') ?? '',
        token: params.get('token') ?? undefined,
    };
}

function loginForm(root: HTMLElement, onSubmit: (raterId: string, affiliation: string) => void): void {
    root.textContent = '';
    const form = document.createElement('form');
    form.className = 'login';
    form.innerHTML = `
        <h1>Listening test</h1>
        <label>Rater id <input name="rater" required></label>
        <label>Affiliation (your team's system id, or "organizer")
            <input name="affiliation" required></label>
        <button type="submit">Begin</button>
    `;
    form.addEventListener('submit', event => {
        event.preventDefault();
        const data = new FormData(form);
        onSubmit(String(data.get('rater')), String(data.get('affiliation')));
    });
    root.appendChild(form);
}

export function boot(): void {
    const root = document.getElementById('app');
    if (!root) {
        throw new Error('missing #app container');
    }
    const config = readConfig();
    const controller = new SessionController(
        new ListenClient(config), window.localStorage,
    );
    const view = new SessionView(controller, root);
    loginForm(root, (raterId, affiliation) => {
        void view.run({ raterId, affiliation });
    });
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
    boot();
}
