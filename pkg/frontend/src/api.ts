/**
 * Typed client for the rule service. Fact values travel as verbatim text
 * (see rawjson.ts); this module does no arithmetic and no reformatting.
 */

import { asStringArray, display, member, parseRaw, RawJson } from './rawjson.js';

export interface FieldInfo {
  name: string;
  sort: 'input' | 'optional';
  type: string;
}

export interface RecordInfo {
  name: string;
  fields: FieldInfo[];
}

export interface RuleInfo {
  record: string;
  field: string;
  rule: string | null;
}

export interface GraphEdge {
  from: string;
  to: string;
}

export interface SchemaInfo {
  records: RecordInfo[];
  enums: Array<{ name: string; members: string[] }>;
  rules: RuleInfo[];
  fieldEdges: GraphEdge[];
  typeEdges: GraphEdge[];
  warnings: string[];
}

export type FactStatus = 'input' | 'computed' | 'overridden' | 'error';

export interface ApiErrorEntry {
  code: string;
  message: string;
}

export interface FactView {
  factId: string;
  status: FactStatus;
  /** Canonical encoding of the value, verbatim from the wire. */
  valueText: string | null;
  errors: ApiErrorEntry[];
  depFields: string[];
  depTypes: string[];
}

export interface MissingReport {
  fact: string;
  missing: string[];
  types: string[];
}

export class ServiceError extends Error {
  constructor(readonly status: number, readonly errors: ApiErrorEntry[]) {
    super(errors.map((e) => `${e.code}: ${e.message}`).join('; ') || `HTTP ${status}`);
  }
}

function errorsOf(body: RawJson): ApiErrorEntry[] {
  const list = member(body, 'errors');
  if (!list || list.kind !== 'array') return [];
  return list.items.map((item) => ({
    code: stringMember(item, 'code') ?? 'Error',
    message: stringMember(item, 'message') ?? display(item),
  }));
}

function stringMember(node: RawJson, key: string): string | null {
  const value = member(node, key);
  return value && value.kind === 'string' ? value.value : null;
}

export function parseFactRef(ref: string): { type: string; key: string; field: string } {
  const match = /^([A-Z][A-Za-z0-9_]*)\[(.+)\]\.([a-z][A-Za-z0-9_]*|key)$/.exec(ref);
  if (!match) throw new Error(`bad fact reference: ${ref}`);
  return { type: match[1], key: match[2], field: match[3] };
}

export class ServiceClient {
  constructor(readonly baseUrl: string) {}

  private async request(path: string, init?: RequestInit): Promise<RawJson> {
    const response = await fetch(this.baseUrl + path, init);
    const body = parseRaw(await response.text());
    if (!response.ok) {
      throw new ServiceError(response.status, errorsOf(body));
    }
    return body;
  }

  async createSession(documentText: string): Promise<string> {
    const body = await this.request('/sessions', { method: 'POST', body: documentText });
    const id = stringMember(body, 'id');
    if (!id) throw new Error('service returned no session id');
    return id;
  }

  async fetchSchema(): Promise<SchemaInfo> {
    const body = await this.request('/schema');
    const records = member(body, 'records');
    const enums = member(body, 'enums');
    const rules = member(body, 'rules');
    const edges = member(body, 'edges');
    const toEdge = (node: RawJson): GraphEdge => ({
      from: stringMember(node, 'from') ?? '',
      to: stringMember(node, 'to') ?? '',
    });
    return {
      records:
        records?.kind === 'array'
          ? records.items.map((r) => ({
              name: stringMember(r, 'name') ?? '',
              fields:
                member(r, 'fields')?.kind === 'array'
                  ? (member(r, 'fields') as { items: RawJson[] }).items.map((f) => ({
                      name: stringMember(f, 'name') ?? '',
                      sort: (stringMember(f, 'sort') ?? 'optional') as 'input' | 'optional',
                      type: stringMember(f, 'type') ?? '',
                    }))
                  : [],
            }))
          : [],
      enums:
        enums?.kind === 'array'
          ? enums.items.map((e) => ({
              name: stringMember(e, 'name') ?? '',
              members: asStringArray(member(e, 'members')),
            }))
          : [],
      rules:
        rules?.kind === 'array'
          ? rules.items.map((r) => ({
              record: stringMember(r, 'record') ?? '',
              field: stringMember(r, 'field') ?? '',
              rule: stringMember(r, 'rule'),
            }))
          : [],
      fieldEdges:
        edges && member(edges, 'fields')?.kind === 'array'
          ? (member(edges, 'fields') as { items: RawJson[] }).items.map(toEdge)
          : [],
      typeEdges:
        edges && member(edges, 'types')?.kind === 'array'
          ? (member(edges, 'types') as { items: RawJson[] }).items.map(toEdge)
          : [],
      warnings: asStringArray(member(body, 'warnings')),
    };
  }

  async fetchFact(sessionId: string, factId: string): Promise<FactView> {
    const { type, key, field } = parseFactRef(factId);
    const path =
      `/sessions/${encodeURIComponent(sessionId)}/facts/` +
      `${encodeURIComponent(type)}/${encodeURIComponent(key)}/${encodeURIComponent(field)}`;
    const body = await this.request(path);
    const deps = member(body, 'deps');
    const value = member(body, 'value');
    return {
      factId: stringMember(body, 'fact') ?? factId,
      status: (stringMember(body, 'status') ?? 'error') as FactStatus,
      valueText: value ? display(value) : null,
      errors: errorsOf(body),
      depFields: deps ? asStringArray(member(deps, 'fields')) : [],
      depTypes: deps ? asStringArray(member(deps, 'types')) : [],
    };
  }

  /**
   * Set an override. `rawValue` is a JSON literal typed by the analyst
   * (false, 0.25, 2023, "Text"); it is embedded verbatim so the service
   * sees exactly what was written.
   */
  async setOverride(sessionId: string, factId: string, rawValue: string): Promise<void> {
    parseRaw(rawValue); // reject malformed input before it reaches the wire
    const body = `{"fact": ${JSON.stringify(factId)}, "value": ${rawValue}}`;
    await this.request(`/sessions/${encodeURIComponent(sessionId)}/overrides`, {
      method: 'PUT',
      body,
    });
  }

  async clearOverride(sessionId: string, factId: string): Promise<void> {
    await this.request(
      `/sessions/${encodeURIComponent(sessionId)}/overrides/${encodeURIComponent(factId)}`,
      { method: 'DELETE' },
    );
  }

  async fetchMissing(sessionId: string, factId: string): Promise<MissingReport> {
    const body = await this.request(
      `/sessions/${encodeURIComponent(sessionId)}/missing?fact=${encodeURIComponent(factId)}`,
    );
    return {
      fact: factId,
      missing: asStringArray(member(body, 'missing')),
      types: asStringArray(member(body, 'types')),
    };
  }

  /** Saturated dataset document; used to list record keys for the browser. */
  async saturateDocument(sessionId: string): Promise<Array<{ key: string; type: string }>> {
    const body = await this.request(`/sessions/${encodeURIComponent(sessionId)}/saturate`, {
      method: 'POST',
    });
    const doc = member(body, 'document');
    if (!doc || doc.kind !== 'object') return [];
    return doc.entries.map(([key, record]) => ({
      key,
      type: stringMember(record, 'type') ?? '',
    }));
  }
}
