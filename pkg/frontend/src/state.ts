// Review session state and its pure transitions. The server is the source
// of truth for labels; this state only tracks the in-flight session. The
// ONLY thing persisted across reloads is the filter pair.

import type { OccurrenceSummary, ReviewItem, Stats } from "./api.js";

export interface Filters {
  status: "unreviewed" | "reviewed" | null;
  book: string | null;
}

export interface ReviewState {
  queue: OccurrenceSummary[];
  index: number;
  item: ReviewItem | null;
  selectedIndex: number | null;
  customMode: boolean;
  customText: string;
  pendingWrite: boolean;
  errorBanner: string | null;
  validation: string | null;
  stats: Stats | null;
  filters: Filters;
  done: boolean;
}

export const DEFAULT_FILTERS: Filters = { status: "unreviewed", book: null };

export function initialState(filters: Filters = DEFAULT_FILTERS): ReviewState {
  return {
    queue: [],
    index: 0,
    item: null,
    selectedIndex: null,
    customMode: false,
    customText: "",
    pendingWrite: false,
    errorBanner: null,
    validation: null,
    stats: null,
    filters,
    done: false,
  };
}

export function currentSummary(state: ReviewState): OccurrenceSummary | null {
  return state.queue[state.index] ?? null;
}

export function selectCandidate(state: ReviewState, index: number): ReviewState {
  if (!state.item || index < 0 || index >= state.item.candidates.length) {
    return state;
  }
  return { ...state, selectedIndex: index, validation: null };
}

export function startCustom(state: ReviewState): ReviewState {
  return { ...state, customMode: true, customText: "", validation: null };
}

export function cancelCustom(state: ReviewState): ReviewState {
  return { ...state, customMode: false, customText: "" };
}

export function setCustomText(state: ReviewState, text: string): ReviewState {
  return { ...state, customText: text, validation: null };
}

export function advance(state: ReviewState): ReviewState {
  // the labeled occurrence leaves the unreviewed queue; the next one slides
  // into the same position
  const queue = state.queue.slice(0, state.index).concat(
    state.queue.slice(state.index + 1));
  const index = Math.min(state.index, Math.max(0, queue.length - 1));
  return {
    ...state,
    queue,
    index,
    item: null,
    selectedIndex: null,
    customMode: false,
    customText: "",
    done: queue.length === 0,
  };
}

export function skip(state: ReviewState): ReviewState {
  if (state.queue.length === 0) return state;
  return {
    ...state,
    index: (state.index + 1) % state.queue.length,
    item: null,
    selectedIndex: null,
    customMode: false,
    customText: "",
  };
}

// --- filter persistence (the one piece of state that survives reload) ---

const FILTERS_KEY = "termalign.filters";

export function loadFilters(storage: Pick<Storage, "getItem"> = localStorage): Filters {
  try {
    const raw = storage.getItem(FILTERS_KEY);
    if (!raw) return { ...DEFAULT_FILTERS };
    const parsed = JSON.parse(raw);
    const status = parsed.status === "reviewed" || parsed.status === "unreviewed"
      ? parsed.status : null;
    return { status, book: typeof parsed.book === "string" ? parsed.book : null };
  } catch {
    return { ...DEFAULT_FILTERS };
  }
}

export function saveFilters(filters: Filters,
                            storage: Pick<Storage, "setItem"> = localStorage): void {
  storage.setItem(FILTERS_KEY, JSON.stringify(filters));
}
