import { describe, expect, it } from 'vitest';

import { asStringArray, display, member, parseRaw, RawJsonError } from '../src/rawjson.js';

describe('parseRaw', () => {
  it('keeps number lexemes verbatim', () => {
    const doc = parseRaw('{"value": 75.00}');
    const value = member(doc, 'value');
    expect(value).toEqual({ kind: 'number', raw: '75.00' });
    expect(display(value!)).toBe('75.00');
  });

  it('does not collapse trailing zeros the way JSON.parse would', () => {
    expect(display(parseRaw('0.030'))).toBe('0.030');
    expect(String(JSON.parse('0.030'))).toBe('0.03'); // the failure mode we avoid
  });

  it('parses nested structures', () => {
    const doc = parseRaw('{"deps": {"fields": ["A[x].f", "B[y].g"], "types": []}}');
    const deps = member(doc, 'deps')!;
    expect(asStringArray(member(deps, 'fields'))).toEqual(['A[x].f', 'B[y].g']);
    expect(asStringArray(member(deps, 'types'))).toEqual([]);
  });

  it('handles escapes, negatives, exponents and literals', () => {
    expect(display(parseRaw('"a\\nb\\u0041"'))).toBe('a\nbA');
    expect(display(parseRaw('-12.50'))).toBe('-12.50');
    expect(display(parseRaw('1e3'))).toBe('1e3');
    expect(display(parseRaw('true'))).toBe('true');
    expect(display(parseRaw('null'))).toBe('null');
  });

  it('rejects malformed input with a position', () => {
    expect(() => parseRaw('{"a": }')).toThrow(RawJsonError);
    expect(() => parseRaw('{} trailing')).toThrow(/trailing/);
    expect(() => parseRaw('')).toThrow(/end of input/);
  });
});
