/** Pure HTML rendering for the three-section problem screen.
 *
 * Top: task instructions and progress.  Middle: the hint text (a single
 * MT sentence, or the whole MT document with the key sentence
 * highlighted) -- absent entirely for no-hint problems.  Bottom: the
 * problem sentence with one free-text input per gap.
 */

import type { AdminProgress, DonePayload, ProblemPayload } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function hintSection(problem: ProblemPayload): string {
  const hint = problem.hint;
  if (hint.kind === "none") {
    return "";
  }
  if (hint.kind === "sentence") {
    return `<section class="hint" id="hint-section">
      <h2>Hint text</h2>
      <p class="hint-sentence">${escapeHtml(hint.text)}</p>
    </section>`;
  }
  const sentences = hint.sentences
    .map((sentence, index) => {
      const classes = index === hint.highlight_index ? "hint-line key-sentence" : "hint-line";
      return `<p class="${classes}">${escapeHtml(sentence)}</p>`;
    })
    .join("\n");
  return `<section class="hint" id="hint-section">
    <h2>Hint text</h2>
    <div class="hint-document">${sentences}</div>
  </section>`;
}

function sentenceSection(problem: ProblemPayload): string {
  const parts = problem.sentence.segments.map((segment) => {
    if (segment.kind === "text") {
      return `<span class="literal">${escapeHtml(segment.text)}</span>`;
    }
    return `<input type="text" class="gap-input" size="15" autocomplete="off"
      data-position="${segment.position}" aria-label="gap ${segment.position}">`;
  });
  return `<section class="problem" id="problem-section">
    <h2>Problem sentence</h2>
    <p class="gapped-sentence">${parts.join(" ")}</p>
    <button id="submit-button" disabled>Submit answers</button>
    <p class="status" id="status-line"></p>
  </section>`;
}

export function renderProblemView(problem: ProblemPayload): string {
  const top = `<section class="instructions" id="instructions-section">
    <h2>Task</h2>
    <p>${escapeHtml(problem.instructions)}</p>
    <p class="progress">Problem ${problem.progress.completed + 1} of ${problem.progress.total}</p>
  </section>`;
  return [top, hintSection(problem), sentenceSection(problem)]
    .filter((section) => section !== "")
    .join("\n");
}

export function renderDoneView(done: DonePayload): string {
  return `<section class="done">
    <h2>All done</h2>
    <p>You completed ${done.completed} of ${done.total} problems. Thank you!</p>
  </section>`;
}

export function renderErrorView(message: string): string {
  return `<section class="error">
    <p>Could not reach the server: ${escapeHtml(message)}</p>
    <button id="retry-button">Retry</button>
  </section>`;
}

export function renderAdminView(progress: AdminProgress): string {
  const rows = Object.entries(progress)
    .map(
      ([informant, p]) =>
        `<tr><td>${escapeHtml(informant)}</td><td>${p.completed}/${p.total}</td>` +
        `<td>${p.done ? "done" : "in progress"}</td></tr>`
    )
    .join("\n");
  return `<section class="admin">
    <h2>Progress</h2>
    <table><thead><tr><th>informant</th><th>completed</th><th>state</th></tr></thead>
    <tbody>${rows}</tbody></table>
  </section>`;
}
