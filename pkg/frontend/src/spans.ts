/**
 * Character-span arithmetic for annotation rendering.
 *
 * The service addresses text by Unicode code points (one index per
 * character, astral symbols included), while JavaScript strings are
 * indexed by UTF-16 code units. Every span that crosses the API
 * boundary goes through the conversions here, so multi-byte characters
 * never shift a highlight by one.
 */

/** A half-open [start, end) range in service (code point) coordinates. */
export type Span = [number, number];

/** Convert a code-point index into a UTF-16 code-unit index. */
export function codePointToUnitIndex(text: string, cpIndex: number): number {
  if (cpIndex < 0) throw new RangeError(`negative index ${cpIndex}`);
  let units = 0;
  let points = 0;
  for (const ch of text) {
    if (points === cpIndex) return units;
    units += ch.length;
    points += 1;
  }
  if (points === cpIndex) return units;
  throw new RangeError(`code point index ${cpIndex} outside text of length ${points}`);
}

/** Convert a UTF-16 code-unit index into a code-point index. */
export function unitToCodePointIndex(text: string, unitIndex: number): number {
  if (unitIndex < 0 || unitIndex > text.length) {
    throw new RangeError(`unit index ${unitIndex} outside [0, ${text.length}]`);
  }
  let units = 0;
  let points = 0;
  for (const ch of text) {
    if (units >= unitIndex) break;
    units += ch.length;
    points += 1;
  }
  return points;
}

/** Number of code points in the text. */
export function codePointLength(text: string): number {
  let n = 0;
  for (const _ of text) n += 1;
  return n;
}

/** Slice text by code-point offsets (the service's `text[span]`). */
export function sliceByCodePoints(text: string, span: Span): string {
  const [start, end] = span;
  return text.slice(
    codePointToUnitIndex(text, start),
    codePointToUnitIndex(text, end),
  );
}

export interface Segment {
  text: string;
  marked: boolean;
}

/**
 * Split text into contiguous segments, marking the given spans.
 * Segments concatenate back to the original text, so rendering each
 * marked segment inside an inline element never reflows or drops
 * characters. Overlapping spans are merged.
 */
export function buildSegments(text: string, spans: Span[]): Segment[] {
  const total = codePointLength(text);
  const clipped = spans
    .map(([s, e]): Span => [Math.max(0, s), Math.min(total, e)])
    .filter(([s, e]) => s < e)
    .sort((a, b) => a[0] - b[0]);
  const merged: Span[] = [];
  for (const span of clipped) {
    const last = merged[merged.length - 1];
    if (last && span[0] <= last[1]) {
      last[1] = Math.max(last[1], span[1]);
    } else {
      merged.push([span[0], span[1]]);
    }
  }
  const segments: Segment[] = [];
  let cursor = 0;
  for (const [s, e] of merged) {
    if (cursor < s) {
      segments.push({ text: sliceByCodePoints(text, [cursor, s]), marked: false });
    }
    segments.push({ text: sliceByCodePoints(text, [s, e]), marked: true });
    cursor = e;
  }
  if (cursor < total) {
    segments.push({ text: sliceByCodePoints(text, [cursor, total]), marked: false });
  }
  if (segments.length === 0) segments.push({ text, marked: false });
  return segments;
}

/**
 * Translate a selection given in UTF-16 offsets (what the DOM reports)
 * into a service span in code-point coordinates. Returns null for a
 * collapsed selection.
 */
export function selectionToSpan(
  text: string,
  anchorUnits: number,
  focusUnits: number,
): Span | null {
  const lo = Math.min(anchorUnits, focusUnits);
  const hi = Math.max(anchorUnits, focusUnits);
  if (lo === hi) return null;
  return [unitToCodePointIndex(text, lo), unitToCodePointIndex(text, hi)];
}
