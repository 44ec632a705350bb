/**
 * Application state and actions. The store owns every interaction with the
 * service; the DOM layer only renders state and dispatches actions. All
 * displayed numbers come from the service verbatim: there is no client-side
 * arithmetic anywhere in this app.
 */

import {
  FactView,
  MissingReport,
  SchemaInfo,
  ServiceClient,
  ServiceError,
} from './api.js';

export interface OverrideEntry {
  fact: string;
  /** The JSON literal as typed by the analyst. */
  value: string;
}

export interface RecordKey {
  key: string;
  type: string;
}

export interface AppState {
  sessionId: string | null;
  schema: SchemaInfo | null;
  recordKeys: RecordKey[];
  openFacts: FactView[];
  overrides: OverrideEntry[];
  selected: string | null;
  missing: MissingReport | null;
  notice: string | null;
}

export type Listener = (state: AppState) => void;

export class Store {
  state: AppState = {
    sessionId: null,
    schema: null,
    recordKeys: [],
    openFacts: [],
    overrides: [],
    selected: null,
    missing: null,
    notice: null,
  };

  private listeners: Listener[] = [];

  constructor(private api: ServiceClient) {}

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private publish(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  private patch(changes: Partial<AppState>): void {
    this.state = { ...this.state, ...changes };
    this.publish();
  }

  private async guard<T>(work: () => Promise<T>): Promise<T | undefined> {
    try {
      const result = await work();
      if (this.state.notice) this.patch({ notice: null });
      return result;
    } catch (error) {
      const message =
        error instanceof ServiceError || error instanceof Error
          ? error.message
          : String(error);
      this.patch({ notice: message });
      return undefined;
    }
  }

  async loadSchema(): Promise<void> {
    await this.guard(async () => {
      this.patch({ schema: await this.api.fetchSchema() });
    });
  }

  async createSession(documentText: string): Promise<void> {
    await this.guard(async () => {
      const sessionId = await this.api.createSession(documentText);
      const recordKeys = documentKeys(documentText);
      this.patch({
        sessionId,
        recordKeys,
        openFacts: [],
        overrides: [],
        selected: null,
        missing: null,
      });
    });
  }

  /** Attach to an existing session (deep link); keys recover via saturate. */
  async attachSession(sessionId: string): Promise<void> {
    await this.guard(async () => {
      const recordKeys = await this.api.saturateDocument(sessionId);
      this.patch({ sessionId, recordKeys });
    });
  }

  async openFact(factId: string): Promise<void> {
    const sessionId = this.state.sessionId;
    if (!sessionId) return;
    await this.guard(async () => {
      const view = await this.api.fetchFact(sessionId, factId);
      const others = this.state.openFacts.filter((f) => f.factId !== factId);
      this.patch({ openFacts: [...others, view], selected: factId });
    });
  }

  closeFact(factId: string): void {
    this.patch({
      openFacts: this.state.openFacts.filter((f) => f.factId !== factId),
      selected: this.state.selected === factId ? null : this.state.selected,
    });
  }

  select(factId: string | null): void {
    this.patch({ selected: factId });
  }

  /** Re-fetch every open fact so the analyst sees the impact immediately. */
  async refreshOpenFacts(): Promise<void> {
    const sessionId = this.state.sessionId;
    if (!sessionId) return;
    await this.guard(async () => {
      const refreshed: FactView[] = [];
      for (const fact of this.state.openFacts) {
        refreshed.push(await this.api.fetchFact(sessionId, fact.factId));
      }
      this.patch({ openFacts: refreshed });
    });
  }

  async setOverride(fact: string, value: string): Promise<void> {
    const sessionId = this.state.sessionId;
    if (!sessionId) return;
    const applied = await this.guard(async () => {
      await this.api.setOverride(sessionId, fact, value);
      return true;
    });
    if (!applied) return;
    const others = this.state.overrides.filter((o) => o.fact !== fact);
    this.patch({ overrides: [...others, { fact, value }] });
    await this.refreshOpenFacts();
  }

  async clearOverride(fact: string): Promise<void> {
    const sessionId = this.state.sessionId;
    if (!sessionId) return;
    const applied = await this.guard(async () => {
      await this.api.clearOverride(sessionId, fact);
      return true;
    });
    if (!applied) return;
    this.patch({ overrides: this.state.overrides.filter((o) => o.fact !== fact) });
    await this.refreshOpenFacts();
  }

  async clearAllOverrides(): Promise<void> {
    for (const entry of [...this.state.overrides]) {
      await this.clearOverride(entry.fact);
    }
  }

  async showMissing(factId: string): Promise<void> {
    const sessionId = this.state.sessionId;
    if (!sessionId) return;
    await this.guard(async () => {
      this.patch({ missing: await this.api.fetchMissing(sessionId, factId) });
    });
  }

  // --- deep links -------------------------------------------------------

  /** UI state is reconstructible from (session, open facts, overrides). */
  toHash(): string {
    if (!this.state.sessionId) return '';
    const parts = [`session=${encodeURIComponent(this.state.sessionId)}`];
    for (const fact of this.state.openFacts) {
      parts.push(`fact=${encodeURIComponent(fact.factId)}`);
    }
    for (const o of this.state.overrides) {
      parts.push(
        `override=${encodeURIComponent(o.fact)}:${encodeURIComponent(o.value)}`,
      );
    }
    return '#' + parts.join('&');
  }

  async restoreFromHash(hash: string): Promise<void> {
    const parsed = parseHash(hash);
    if (!parsed.sessionId) return;
    await this.attachSession(parsed.sessionId);
    if (!this.state.sessionId) return;
    for (const entry of parsed.overrides) {
      await this.setOverride(entry.fact, entry.value);
    }
    for (const factId of parsed.facts) {
      await this.openFact(factId);
    }
  }
}

export interface HashState {
  sessionId: string | null;
  facts: string[];
  overrides: OverrideEntry[];
}

export function parseHash(hash: string): HashState {
  const out: HashState = { sessionId: null, facts: [], overrides: [] };
  for (const piece of hash.replace(/^#/, '').split('&')) {
    const eq = piece.indexOf('=');
    if (eq < 0) continue;
    const name = piece.slice(0, eq);
    const rest = piece.slice(eq + 1);
    if (name === 'session') out.sessionId = decodeURIComponent(rest);
    if (name === 'fact') out.facts.push(decodeURIComponent(rest));
    if (name === 'override') {
      const colon = rest.indexOf(':');
      if (colon > 0) {
        out.overrides.push({
          fact: decodeURIComponent(rest.slice(0, colon)),
          value: decodeURIComponent(rest.slice(colon + 1)),
        });
      }
    }
  }
  return out;
}

/** Top-level (key, type) pairs of a dataset document the analyst loaded. */
export function documentKeys(documentText: string): RecordKey[] {
  try {
    const doc = JSON.parse(documentText) as Record<string, { type?: string }>;
    return Object.entries(doc).map(([key, record]) => ({
      key,
      type: typeof record?.type === 'string' ? record.type : '',
    }));
  } catch {
    return [];
  }
}
