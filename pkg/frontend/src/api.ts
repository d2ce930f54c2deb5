// Typed client for the review service HTTP API. The server is the source
// of truth; this layer only shapes requests and errors.

export interface OccurrenceSummary {
  occurrence_id: string;
  book_id: string;
  foreign_term: string;
  n_candidates: number;
  status: "unreviewed" | "reviewed";
}

export interface OccurrencePage {
  items: OccurrenceSummary[];
  page: number;
  page_size: number;
  total: number;
  total_pages: number;
}

export interface CandidateRow {
  candidate_id: string;
  surface: string;
  word_count: number;
  is_variant: boolean;
  custom?: boolean;
  span: [number, number] | null;
  score: number | null;
  components: Record<string, number> | null;
  selected: boolean;
  label: boolean | null;
  label_provenance: string | null;
}

export interface ReviewItem {
  occurrence: {
    occurrence_id: string;
    doc_id: string;
    book_id: string;
    foreign_term: string;
    context_text: string;
    foreign_span: [number, number];
  };
  candidates: CandidateRow[];
  status: "unreviewed" | "reviewed";
}

export interface Stats {
  occurrences: number;
  reviewed: number;
  unreviewed: number;
  expert_records: number;
}

export interface LabelBody {
  candidate_id?: string;
  custom_arabic_term?: string;
  reviewer?: string;
}

export class ApiError extends Error {
  constructor(public status: number, public code: string, message: string) {
    super(message);
  }
}

export interface ListParams {
  status?: "unreviewed" | "reviewed";
  book?: string;
  page?: number;
  page_size?: number;
}

export class ApiClient {
  constructor(private base: string, private token?: string) {}

  private headers(json = false): Record<string, string> {
    const h: Record<string, string> = {};
    if (json) h["Content-Type"] = "application/json";
    if (this.token) h["X-Review-Token"] = this.token;
    return h;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await fetch(this.base + path, init);
    if (!resp.ok) {
      let code = "http-error";
      let message = `${resp.status}`;
      try {
        const body = await resp.json();
        code = body.error ?? code;
        message = body.message ?? message;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(resp.status, code, message);
    }
    return (await resp.json()) as T;
  }

  listOccurrences(params: ListParams = {}): Promise<OccurrencePage> {
    const q = new URLSearchParams();
    if (params.status) q.set("status", params.status);
    if (params.book) q.set("book", params.book);
    if (params.page) q.set("page", String(params.page));
    if (params.page_size) q.set("page_size", String(params.page_size));
    const qs = q.toString();
    return this.request<OccurrencePage>(
      `/api/occurrences${qs ? "?" + qs : ""}`, { headers: this.headers() });
  }

  async listAllOccurrences(params: Omit<ListParams, "page"> = {}): Promise<OccurrenceSummary[]> {
    const pageSize = params.page_size ?? 100;
    const items: OccurrenceSummary[] = [];
    let page = 1;
    for (;;) {
      const batch = await this.listOccurrences({ ...params, page, page_size: pageSize });
      items.push(...batch.items);
      if (page >= batch.total_pages) break;
      page += 1;
    }
    return items;
  }

  getOccurrence(id: string): Promise<ReviewItem> {
    return this.request<ReviewItem>(
      `/api/occurrences/${encodeURIComponent(id)}`, { headers: this.headers() });
  }

  postLabel(id: string, body: LabelBody): Promise<{ ok: boolean; deduplicated: boolean }> {
    return this.request(`/api/occurrences/${encodeURIComponent(id)}/label`, {
      method: "POST",
      headers: this.headers(true),
      body: JSON.stringify(body),
    });
  }

  stats(): Promise<Stats> {
    return this.request<Stats>("/api/stats", { headers: this.headers() });
  }
}
