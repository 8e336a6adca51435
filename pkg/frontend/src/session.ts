/** Session controller: load problem, collect fills, submit, advance.
 *
 * Submission is guarded against double clicks by an in-flight flag and
 * by the server's idempotent receipt contract; a failed POST is retried
 * with the same payload until acknowledged, so no fills are lost to
 * transient network errors.  Blank inputs are allowed (scored wrong).
 */

import { ApiClient, ApiError } from "./api.js";
import { isDone, type Fills, type NextPayload } from "./types.js";
import { renderDoneView, renderErrorView, renderProblemView } from "./view.js";

export interface Screen {
  show(html: string): void;
  readFills(): Fills;
  setSubmitEnabled(enabled: boolean): void;
  setStatus(text: string): void;
  onSubmit(handler: () => void): void;
  onRetry(handler: () => void): void;
}

export interface SessionOptions {
  retryDelayMs?: number;
  maxRetries?: number;
  now?: () => number;
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export class SessionController {
  private current: NextPayload | null = null;
  private shownAt = 0;
  private inFlight = false;
  private readonly retryDelayMs: number;
  private readonly maxRetries: number;
  private readonly now: () => number;
  private readonly sleep: (ms: number) => Promise<void>;

  constructor(
    private api: ApiClient,
    private informantId: string,
    private screen: Screen,
    options: SessionOptions = {}
  ) {
    this.retryDelayMs = options.retryDelayMs ?? 1000;
    this.maxRetries = options.maxRetries ?? 5;
    this.now = options.now ?? (() => Date.now());
    this.sleep = options.sleep ?? defaultSleep;
    this.screen.onSubmit(() => void this.submit());
    this.screen.onRetry(() => void this.start());
  }

  async start(): Promise<void> {
    try {
      this.current = await this.api.next(this.informantId);
    } catch (error) {
      this.screen.show(renderErrorView(String(error)));
      return;
    }
    this.render();
  }

  private render(): void {
    const payload = this.current;
    if (payload === null) {
      return;
    }
    if (isDone(payload)) {
      this.screen.show(renderDoneView(payload));
      return;
    }
    this.screen.show(renderProblemView(payload));
    // submit stays disabled until the rendered page is fully mounted
    this.screen.setSubmitEnabled(true);
    this.shownAt = this.now();
  }

  /** Submit the current fills; safe to call repeatedly. */
  async submit(): Promise<void> {
    const payload = this.current;
    if (payload === null || isDone(payload) || this.inFlight) {
      return;
    }
    this.inFlight = true;
    this.screen.setSubmitEnabled(false);
    const fills = this.screen.readFills();
    const elapsed = this.now() - this.shownAt;
    try {
      let attempt = 0;
      for (;;) {
        try {
          await this.api.submit(this.informantId, payload.problem_id, fills, elapsed);
          break;
        } catch (error) {
          if (error instanceof ApiError) {
            // a definite server answer: surface it, do not loop
            this.screen.setStatus(`Rejected: ${error.message}`);
            return;
          }
          attempt += 1;
          if (attempt > this.maxRetries) {
            this.screen.setStatus("Offline: will keep retrying, answers are kept.");
            this.screen.setSubmitEnabled(true);
            this.inFlight = false;
            return;
          }
          this.screen.setStatus(`Connection problem, retrying (${attempt})...`);
          await this.sleep(this.retryDelayMs * attempt);
        }
      }
      await this.start();
    } finally {
      this.inFlight = false;
    }
  }
}
