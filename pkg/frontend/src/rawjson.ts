/**
 * JSON scanner that keeps number lexemes verbatim.
 *
 * The service encodes money with a fixed rendering (75.00, not 75); going
 * through JSON.parse would collapse that to a float and re-format it. The
 * UI never does arithmetic on fact values, so numbers stay raw strings.
 */

export type RawJson =
  | { kind: 'object'; entries: Array<[string, RawJson]> }
  | { kind: 'array'; items: RawJson[] }
  | { kind: 'string'; value: string }
  | { kind: 'number'; raw: string }
  | { kind: 'boolean'; value: boolean }
  | { kind: 'null' };

export class RawJsonError extends Error {
  constructor(message: string, readonly position: number) {
    super(`${message} at offset ${position}`);
  }
}

class Scanner {
  pos = 0;

  constructor(readonly text: string) {}

  error(message: string): never {
    throw new RawJsonError(message, this.pos);
  }

  skipWs(): void {
    while (this.pos < this.text.length && ' \t\n\r'.includes(this.text[this.pos])) {
      this.pos += 1;
    }
  }

  expect(ch: string): void {
    if (this.text[this.pos] !== ch) {
      this.error(`expected '${ch}'`);
    }
    this.pos += 1;
  }

  value(): RawJson {
    this.skipWs();
    const ch = this.text[this.pos];
    if (ch === undefined) this.error('unexpected end of input');
    if (ch === '{') return this.object();
    if (ch === '[') return this.array();
    if (ch === '"') return { kind: 'string', value: this.string() };
    if (ch === 't' || ch === 'f') return this.boolean();
    if (ch === 'n') return this.nullLiteral();
    if (ch === '-' || (ch >= '0' && ch <= '9')) return this.number();
    this.error(`unexpected character '${ch}'`);
  }

  object(): RawJson {
    this.expect('{');
    const entries: Array<[string, RawJson]> = [];
    this.skipWs();
    if (this.text[this.pos] === '}') {
      this.pos += 1;
      return { kind: 'object', entries };
    }
    for (;;) {
      this.skipWs();
      const key = this.string();
      this.skipWs();
      this.expect(':');
      entries.push([key, this.value()]);
      this.skipWs();
      if (this.text[this.pos] === ',') {
        this.pos += 1;
        continue;
      }
      this.expect('}');
      return { kind: 'object', entries };
    }
  }

  array(): RawJson {
    this.expect('[');
    const items: RawJson[] = [];
    this.skipWs();
    if (this.text[this.pos] === ']') {
      this.pos += 1;
      return { kind: 'array', items };
    }
    for (;;) {
      items.push(this.value());
      this.skipWs();
      if (this.text[this.pos] === ',') {
        this.pos += 1;
        continue;
      }
      this.expect(']');
      return { kind: 'array', items };
    }
  }

  string(): string {
    this.expect('"');
    let out = '';
    for (;;) {
      const ch = this.text[this.pos];
      if (ch === undefined) this.error('unterminated string');
      if (ch === '"') {
        this.pos += 1;
        return out;
      }
      if (ch === '\\') {
        const esc = this.text[this.pos + 1];
        this.pos += 2;
        if (esc === 'u') {
          const hex = this.text.slice(this.pos, this.pos + 4);
          if (!/^[0-9a-fA-F]{4}$/.test(hex)) this.error('bad \\u escape');
          out += String.fromCharCode(parseInt(hex, 16));
          this.pos += 4;
          continue;
        }
        const mapped: Record<string, string> = {
          '"': '"', '\\': '\\', '/': '/', b: '\b', f: '\f', n: '\n', r: '\r', t: '\t',
        };
        const replacement = mapped[esc ?? ''];
        if (replacement === undefined) this.error(`bad escape \\${esc}`);
        out += replacement;
        continue;
      }
      out += ch;
      this.pos += 1;
    }
  }

  number(): RawJson {
    const match = /^-?(?:0|[1-9][0-9]*)(?:\.[0-9]+)?(?:[eE][+-]?[0-9]+)?/.exec(
      this.text.slice(this.pos),
    );
    if (!match) this.error('malformed number');
    this.pos += match[0].length;
    return { kind: 'number', raw: match[0] };
  }

  boolean(): RawJson {
    if (this.text.startsWith('true', this.pos)) {
      this.pos += 4;
      return { kind: 'boolean', value: true };
    }
    if (this.text.startsWith('false', this.pos)) {
      this.pos += 5;
      return { kind: 'boolean', value: false };
    }
    this.error('malformed literal');
  }

  nullLiteral(): RawJson {
    if (this.text.startsWith('null', this.pos)) {
      this.pos += 4;
      return { kind: 'null' };
    }
    this.error('malformed literal');
  }
}

export function parseRaw(text: string): RawJson {
  const scanner = new Scanner(text);
  const result = scanner.value();
  scanner.skipWs();
  if (scanner.pos !== text.length) {
    throw new RawJsonError('trailing content', scanner.pos);
  }
  return result;
}

/** Member lookup on an object node; undefined when absent. */
export function member(node: RawJson, key: string): RawJson | undefined {
  if (node.kind !== 'object') return undefined;
  const entry = node.entries.find(([k]) => k === key);
  return entry?.[1];
}

/** The canonical scalar rendering, verbatim for numbers. */
export function display(node: RawJson): string {
  switch (node.kind) {
    case 'number':
      return node.raw;
    case 'string':
      return node.value;
    case 'boolean':
      return node.value ? 'true' : 'false';
    case 'null':
      return 'null';
    case 'array':
      return `[${node.items.map(display).join(', ')}]`;
    case 'object':
      return `{${node.entries.map(([k, v]) => `${k}: ${display(v)}`).join(', ')}}`;
  }
}

export function asStringArray(node: RawJson | undefined): string[] {
  if (!node || node.kind !== 'array') return [];
  return node.items.map((item) => (item.kind === 'string' ? item.value : display(item)));
}
