import { AnnotationClient } from "./api.js";
import { AnnotationApp } from "./app.js";

function requireElement<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el as T;
}

function workerIdFromUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("worker") ?? `anon-${Math.random().toString(36).slice(2, 10)}`;
}

const params = new URLSearchParams(window.location.search);
const client = new AnnotationClient("", params.get("session") ?? "default");
const app = new AnnotationApp(client, workerIdFromUrl(), {
  instructions: requireElement<HTMLTextAreaElement>("instructions"),
  document: requireElement("document-panel"),
  claim: requireElement("claim-panel"),
  status: requireElement("status"),
  consistent: requireElement<HTMLButtonElement>("btn-consistent"),
  inconsistent: requireElement<HTMLButtonElement>("btn-inconsistent"),
  clearHighlights: requireElement<HTMLButtonElement>("btn-clear"),
  survey: requireElement("survey"),
  surveyForm: requireElement<HTMLFormElement>("survey-form"),
});

void app.start();
