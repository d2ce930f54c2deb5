// In-place highlighting of the Arabic context. Candidates are nested
// prefixes anchored just before the parenthetical, so the context splits
// into segments with a "nesting depth" = how many candidate spans cover
// each character. Depth drives the highlight color; the foreign term is
// wrapped in an LTR isolate inside the RTL paragraph.

import type { CandidateRow, ReviewItem } from "./api.js";

export interface Segment {
  start: number;
  end: number;
  text: string;
  depth: number;
  foreign: boolean;
  candidateIds: string[];
}

export function segmentContext(context: string, foreignSpan: [number, number],
                               candidates: CandidateRow[]): Segment[] {
  const bounds = new Set<number>([0, context.length, foreignSpan[0], foreignSpan[1]]);
  const spans = candidates
    .filter((c) => c.span !== null)
    .map((c) => ({ id: c.candidate_id, start: c.span![0], end: c.span![1] }));
  for (const s of spans) {
    bounds.add(s.start);
    bounds.add(s.end);
  }
  const sorted = Array.from(bounds).filter((b) => b >= 0 && b <= context.length)
    .sort((a, b) => a - b);
  const segments: Segment[] = [];
  for (let i = 0; i + 1 < sorted.length; i++) {
    const [start, end] = [sorted[i], sorted[i + 1]];
    if (start === end) continue;
    const covering = spans.filter((s) => s.start <= start && end <= s.end);
    segments.push({
      start,
      end,
      text: context.slice(start, end),
      depth: covering.length,
      foreign: foreignSpan[0] <= start && end <= foreignSpan[1],
      candidateIds: covering.map((s) => s.id),
    });
  }
  return segments;
}

export function renderContext(doc: Document, item: ReviewItem,
                              selectedCandidateId: string | null): HTMLElement {
  const p = doc.createElement("p");
  p.className = "context";
  p.dir = "rtl";
  p.lang = "ar";
  const segments = segmentContext(item.occurrence.context_text,
                                  item.occurrence.foreign_span, item.candidates);
  for (const seg of segments) {
    if (seg.foreign) {
      // LTR isolate keeps the Latin term readable inside RTL prose
      const bdi = doc.createElement("bdi");
      bdi.dir = "ltr";
      bdi.className = "foreign-term";
      bdi.textContent = seg.text;
      p.appendChild(bdi);
      continue;
    }
    if (seg.depth === 0) {
      p.appendChild(doc.createTextNode(seg.text));
      continue;
    }
    const mark = doc.createElement("mark");
    mark.className = `nest-${Math.min(seg.depth, 6)}`;
    if (selectedCandidateId && seg.candidateIds.includes(selectedCandidateId)) {
      mark.classList.add("in-selection");
    }
    mark.textContent = seg.text;
    p.appendChild(mark);
  }
  return p;
}
