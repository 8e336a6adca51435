/** Browser bootstrap: bind the controller to the real DOM.
 *
 * Informants open /?token=<informant-id>; admins open /?admin=1.
 */

import { ApiClient } from "./api.js";
import { SessionController, type Screen } from "./session.js";
import type { Fills } from "./types.js";
import { renderAdminView, renderErrorView } from "./view.js";

class DomScreen implements Screen {
  private submitHandler: (() => void) | null = null;
  private retryHandler: (() => void) | null = null;

  constructor(private root: HTMLElement) {}

  show(html: string): void {
    this.root.innerHTML = html;
    const submit = this.root.querySelector<HTMLButtonElement>("#submit-button");
    if (submit && this.submitHandler) {
      submit.addEventListener("click", () => this.submitHandler?.());
    }
    const retry = this.root.querySelector<HTMLButtonElement>("#retry-button");
    if (retry && this.retryHandler) {
      retry.addEventListener("click", () => this.retryHandler?.());
    }
    const first = this.root.querySelector<HTMLInputElement>(".gap-input");
    first?.focus();
  }

  readFills(): Fills {
    const fills: Fills = {};
    this.root.querySelectorAll<HTMLInputElement>(".gap-input").forEach((input) => {
      fills[input.dataset.position ?? ""] = input.value;
    });
    return fills;
  }

  setSubmitEnabled(enabled: boolean): void {
    const submit = this.root.querySelector<HTMLButtonElement>("#submit-button");
    if (submit) {
      submit.disabled = !enabled;
    }
  }

  setStatus(text: string): void {
    const status = this.root.querySelector<HTMLElement>("#status-line");
    if (status) {
      status.textContent = text;
    }
  }

  onSubmit(handler: () => void): void {
    this.submitHandler = handler;
  }

  onRetry(handler: () => void): void {
    this.retryHandler = handler;
  }
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) {
    return;
  }
  const params = new URLSearchParams(window.location.search);
  const api = new ApiClient("");
  if (params.get("admin")) {
    try {
      root.innerHTML = renderAdminView(await api.progress());
    } catch (error) {
      root.innerHTML = renderErrorView(String(error));
    }
    return;
  }
  const token = params.get("token");
  if (!token) {
    root.innerHTML = "<p>Missing ?token=&lt;informant-id&gt; in the URL.</p>";
    return;
  }
  const controller = new SessionController(api, token, new DomScreen(root));
  await controller.start();
}

void boot();
