/**
 * Annotation view: renders one task at a time, captures the judge's
 * label, drawn highlights, and timing, and submits them to the service.
 */

import { AnnotationClient, ApiError, Task } from "./api.js";
import { Span, buildSegments, selectionToSpan, unitToCodePointIndex } from "./spans.js";

const DEFAULT_INSTRUCTIONS =
  "Read the source document, then decide whether the claim sentence is " +
  "factually consistent with it. Model-suggested highlights, when shown, " +
  "are only suggestions. Optionally select the document text that supports " +
  "your decision and the claim text that is wrong.";

type HelpLevel = "not" | "somewhat" | "very";

interface Elements {
  instructions: HTMLTextAreaElement;
  document: HTMLElement;
  claim: HTMLElement;
  status: HTMLElement;
  consistent: HTMLButtonElement;
  inconsistent: HTMLButtonElement;
  clearHighlights: HTMLButtonElement;
  survey: HTMLElement;
  surveyForm: HTMLFormElement;
}

/** UTF-16 offset of (node, offset) measured from the start of container. */
export function offsetWithin(container: Node, node: Node, offset: number): number {
  let total = 0;
  const walk = (current: Node): boolean => {
    if (current === node) {
      total += offset;
      return true;
    }
    if (current.nodeType === Node.TEXT_NODE) {
      total += (current.textContent ?? "").length;
      return false;
    }
    for (const child of Array.from(current.childNodes)) {
      if (walk(child)) return true;
    }
    return false;
  };
  if (!walk(container)) throw new RangeError("selection node outside container");
  return total;
}

export class AnnotationApp {
  private task: Task | null = null;
  private renderStarts = new Map<string, number>();
  private docHighlights: Span[] = [];
  private claimHighlights: Span[] = [];
  private surveySubmitted = false;

  constructor(
    private client: AnnotationClient,
    private workerId: string,
    private el: Elements,
    private now: () => number = () => performance.now(),
  ) {
    el.instructions.value = DEFAULT_INSTRUCTIONS;
    el.consistent.addEventListener("click", () => void this.submit("CONSISTENT"));
    el.inconsistent.addEventListener("click", () => void this.submit("INCONSISTENT"));
    el.clearHighlights.addEventListener("click", () => {
      this.docHighlights = [];
      this.claimHighlights = [];
      this.renderTask();
    });
    el.document.addEventListener("mouseup", () => this.captureSelection("document"));
    el.claim.addEventListener("mouseup", () => this.captureSelection("claim"));
    el.surveyForm.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submitSurvey();
    });
  }

  async start(): Promise<void> {
    await this.advance();
  }

  private async advance(): Promise<void> {
    try {
      const resp = await this.client.nextTask(this.workerId);
      if (resp.exhausted || resp.task === null) {
        this.task = null;
        this.showCompletion();
        return;
      }
      this.task = resp.task;
      this.docHighlights = [];
      this.claimHighlights = [];
      if (!this.renderStarts.has(this.task.example_id)) {
        this.renderStarts.set(this.task.example_id, this.now());
      }
      this.renderTask();
      this.el.status.textContent = "";
    } catch (err) {
      this.el.status.textContent = `Could not reach the service (${String(err)}). Reload to retry.`;
    }
  }

  private renderPanel(target: HTMLElement, text: string, spans: Span[],
                      markClass: string): void {
    target.textContent = "";
    for (const segment of buildSegments(text, spans)) {
      if (segment.marked) {
        const mark = document.createElement("mark");
        mark.className = markClass;
        mark.textContent = segment.text;
        target.appendChild(mark);
      } else {
        target.appendChild(document.createTextNode(segment.text));
      }
    }
  }

  private renderTask(): void {
    const task = this.task;
    if (!task) return;
    const modelDoc: Span[] = [];
    const modelClaim: Span[] = [];
    if (task.condition === "HIGHLIGHTS_ON" && task.highlights) {
      if (task.highlights.support_span) modelDoc.push(task.highlights.support_span);
      if (task.highlights.error_span) modelClaim.push(task.highlights.error_span);
    }
    this.renderPanel(this.el.document, task.document,
                     [...modelDoc, ...this.docHighlights], "doc-mark");
    this.renderPanel(this.el.claim, task.claim,
                     [...modelClaim, ...this.claimHighlights], "claim-mark");
  }

  private captureSelection(side: "document" | "claim"): void {
    const task = this.task;
    const selection = window.getSelection();
    if (!task || !selection || selection.rangeCount === 0) return;
    const range = selection.getRangeAt(0);
    const container = side === "document" ? this.el.document : this.el.claim;
    const text = side === "document" ? task.document : task.claim;
    let span: Span | null;
    try {
      span = selectionToSpan(
        text,
        offsetWithin(container, range.startContainer, range.startOffset),
        offsetWithin(container, range.endContainer, range.endOffset),
      );
    } catch {
      return; // selection reached outside the panel
    }
    if (!span) return;
    if (side === "document") this.docHighlights.push(span);
    else this.claimHighlights.push(span);
    selection.removeAllRanges();
    this.renderTask();
  }

  private async submit(label: "CONSISTENT" | "INCONSISTENT"): Promise<void> {
    const task = this.task;
    if (!task) return;
    const started = this.renderStarts.get(task.example_id) ?? this.now();
    const elapsed = Math.max(1, Math.round(this.now() - started));
    try {
      await this.client.submitJudgment({
        example_id: task.example_id,
        worker_id: this.workerId,
        label,
        condition: task.condition,
        elapsed_ms: elapsed,
        doc_highlights: this.docHighlights,
        claim_highlights: this.claimHighlights,
      });
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.el.status.textContent = "Already submitted; moving on.";
      } else {
        this.el.status.textContent = `Submit failed: ${String(err)}. Try again.`;
        return;
      }
    }
    await this.advance();
  }

  private showCompletion(): void {
    this.el.document.textContent = "";
    this.el.claim.textContent = "";
    this.el.status.textContent = this.surveySubmitted
      ? "All tasks complete. Thank you!"
      : "All tasks complete. Please answer the two questions below.";
    if (!this.surveySubmitted) this.el.survey.hidden = false;
  }

  private async submitSurvey(): Promise<void> {
    const data = new FormData(this.el.surveyForm);
    try {
      await this.client.submitSurvey({
        worker_id: this.workerId,
        article_helpfulness: (data.get("article") as HelpLevel) ?? "not",
        claim_helpfulness: (data.get("claim") as HelpLevel) ?? "not",
      });
      this.surveySubmitted = true;
      this.el.survey.hidden = true;
      this.el.status.textContent = "All tasks complete. Thank you!";
    } catch (err) {
      this.el.status.textContent = `Survey failed: ${String(err)}.`;
    }
  }
}

export { DEFAULT_INSTRUCTIONS, unitToCodePointIndex };
