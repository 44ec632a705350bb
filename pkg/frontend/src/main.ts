/** Bootstrap: wire the store to the DOM and the URL hash (deep links). */

import { ServiceClient } from './api.js';
import { render } from './render.js';
import { Store } from './state.js';

function serviceBaseUrl(): string {
  // Served from the engine itself at /ui, or standalone against a dev box.
  const configured = (window as { REGULA_SERVICE_URL?: string }).REGULA_SERVICE_URL;
  if (configured) return configured;
  return window.location.origin;
}

export function boot(root: HTMLElement): Store {
  const store = new Store(new ServiceClient(serviceBaseUrl()));
  let syncingHash = false;

  store.subscribe((state) => {
    render(root, state);
    syncingHash = true;
    const hash = store.toHash();
    if (hash && window.location.hash !== hash) {
      window.history.replaceState(null, '', hash || '#');
    }
    syncingHash = false;
  });

  window.addEventListener('hashchange', () => {
    if (!syncingHash && window.location.hash) {
      void store.restoreFromHash(window.location.hash);
    }
  });

  root.addEventListener('click', (event) => {
    const target = (event.target as HTMLElement).closest<HTMLElement>(
      '[data-open-fact],[data-close-fact],[data-select-fact],[data-show-missing],' +
        '[data-clear-override],[data-clear-all-overrides]',
    );
    if (!target) return;
    event.preventDefault();
    if (target.dataset.openFact) void store.openFact(target.dataset.openFact);
    else if (target.dataset.closeFact) store.closeFact(target.dataset.closeFact);
    else if (target.dataset.selectFact) store.select(target.dataset.selectFact);
    else if (target.dataset.showMissing) void store.showMissing(target.dataset.showMissing);
    else if (target.dataset.clearOverride) void store.clearOverride(target.dataset.clearOverride);
    else if (target.hasAttribute('data-clear-all-overrides')) void store.clearAllOverrides();
  });

  root.addEventListener('submit', (event) => {
    const form = event.target as HTMLFormElement;
    event.preventDefault();
    const data = new FormData(form);
    if (form.id === 'session-form') {
      const text = String(data.get('document') ?? '').trim() || '{}';
      void store.createSession(text).then(() => store.loadSchema());
    }
    if (form.id === 'override-form') {
      const fact = String(data.get('fact') ?? '').trim();
      const value = String(data.get('value') ?? '').trim();
      if (fact && value) void store.setOverride(fact, value);
    }
  });

  void store.loadSchema().then(() => {
    if (window.location.hash) {
      void store.restoreFromHash(window.location.hash);
    }
  });
  return store;
}

const rootElement = document.getElementById('app');
if (rootElement) {
  boot(rootElement);
}
