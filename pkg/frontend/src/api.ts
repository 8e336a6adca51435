/** Typed client for the annotation service. */

import type { AdminProgress, Fills, NextPayload, Receipt } from "./types.js";

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string }
) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = fetch as unknown as FetchLike
  ) {}

  private async request(path: string, init?: Parameters<FetchLike>[1]): Promise<unknown> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      const detail =
        typeof body === "object" && body !== null && "error" in body
          ? String((body as { error: unknown }).error)
          : `HTTP ${response.status}`;
      throw new ApiError(response.status, detail);
    }
    return body;
  }

  async next(informantId: string): Promise<NextPayload> {
    const body = await this.request(`/api/session/${encodeURIComponent(informantId)}/next`);
    return body as NextPayload;
  }

  async submit(
    informantId: string,
    problemId: string,
    fills: Fills,
    elapsedMs: number
  ): Promise<Receipt> {
    const body = await this.request(
      `/api/session/${encodeURIComponent(informantId)}/response`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({
          problem_id: problemId,
          fills,
          elapsed_ms: Math.round(elapsedMs),
        }),
      }
    );
    return body as Receipt;
  }

  async progress(): Promise<AdminProgress> {
    return (await this.request("/api/admin/progress")) as AdminProgress;
  }
}
