import { describe, expect, it } from "vitest";

import { AnnotationClient, ApiError } from "../src/api.js";
import { sliceByCodePoints } from "../src/spans.js";

function fakeFetch(handler: (url: string, init?: RequestInit) => { status: number; body: unknown }) {
  const calls: Array<{ url: string; init?: RequestInit }> = [];
  const fn = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    calls.push({ url, init });
    const { status, body } = handler(url, init);
    return {
      ok: status >= 200 && status < 300,
      status,
      statusText: String(status),
      json: async () => body,
    } as Response;
  }) as typeof fetch;
  return { fn, calls };
}

describe("AnnotationClient", () => {
  it("requests the next task with worker and session", async () => {
    const { fn, calls } = fakeFetch(() => ({
      status: 200,
      body: { exhausted: false, task: null },
    }));
    const client = new AnnotationClient("", "s1", fn);
    await client.nextTask("w9");
    expect(calls[0].url).toBe("/api/tasks/next?worker=w9&session=s1");
  });

  it("posts judgments and surfaces duplicates as ApiError 409", async () => {
    const { fn, calls } = fakeFetch((url) =>
      url.includes("/api/judgments")
        ? { status: 409, body: { detail: "already judged" } }
        : { status: 200, body: {} });
    const client = new AnnotationClient("", "default", fn);
    const attempt = client.submitJudgment({
      example_id: "e1", worker_id: "w", label: "CONSISTENT",
      condition: "HIGHLIGHTS_ON", elapsed_ms: 1200,
      doc_highlights: [], claim_highlights: [[0, 3]],
    });
    await expect(attempt).rejects.toThrowError(ApiError);
    const sent = JSON.parse(String(calls[0].init?.body));
    expect(sent.claim_highlights).toEqual([[0, 3]]);
    expect(sent.session).toBe("default");
  });

  it("round-trips a multi-byte span against the example endpoint", async () => {
    // Payload mirrors the service's serialization: spans are code-point
    // offsets into the unmodified text, here with an emoji and CJK
    // characters before the negation edit.
    const claim = "She was not late.";
    const { fn } = fakeFetch(() => ({
      status: 200,
      body: {
        id: "mb01:1:negation:ffffffff",
        doc_id: "mb01",
        text: "Zoé visited the café, then 北京, in 2008. She was late.",
        claim,
        extraction_span: [40, 53],
        augmentation_span: [8, 11],
      },
    }));
    const client = new AnnotationClient("", "default", fn);
    const example = await client.getExample("mb01:1:negation:ffffffff");
    expect(sliceByCodePoints(example.claim, example.augmentation_span!)).toBe("not");
    expect(sliceByCodePoints(example.text, example.extraction_span)).toBe("She was late.");
  });
});
