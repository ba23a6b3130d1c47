import { describe, expect, it } from "vitest";
import type { NetworkRecord } from "../src/driver";
import { buildHar, harFileName, isCaptureFileName, serializeHar } from "../src/har";

function record(overrides: Partial<NetworkRecord> = {}): NetworkRecord {
  return {
    method: "GET",
    url: "http://site.test/api/items",
    status: 200,
    requestHeaders: [{ name: "Accept", value: "application/json, text/plain, */*" }],
    responseHeaders: [
      { name: "Content-Type", value: "application/json" },
      { name: "Cache-Control", value: "no-store" },
    ],
    mimeType: "application/json",
    bodySize: 120,
    contentSize: 340,
    startedAt: new Date("2026-08-19T10:00:00.250Z"),
    durationMs: 42.5,
    ...overrides,
  };
}

// The analyzer side splits the stem on "__" and requires run<k>; this
// mirrors that rule so naming drift fails here first.
const STEM_RE = /^(.+?)__(.+?)__run(\d+)$/;

describe("file naming", () => {
  it("formats <site>__<page>__run<k>.har", () => {
    expect(harFileName("alpha", "home", 1)).toBe("alpha__home__run1.har");
    expect(harFileName("shop-east", "checkout.v2", 12)).toBe("shop-east__checkout.v2__run12.har");
  });

  it("round-trips through the analyzer's stem rule", () => {
    for (const [site, page, run] of [
      ["alpha", "home", 1],
      ["beta-2", "product_page", 3],
      ["x", "y", 10],
    ] as const) {
      const name = harFileName(site, page, run);
      expect(name.endsWith(".har")).toBe(true);
      const match = STEM_RE.exec(name.slice(0, -4));
      expect(match).not.toBeNull();
      expect(match?.[1]).toBe(site);
      expect(match?.[2]).toBe(page);
      expect(Number(match?.[3])).toBe(run);
    }
  });

  it("recognizes conforming names and rejects strays", () => {
    expect(isCaptureFileName("alpha__home__run1.har")).toBe(true);
    expect(isCaptureFileName("alpha__home.har")).toBe(false);
    expect(isCaptureFileName("capture_manifest.json")).toBe(false);
    expect(isCaptureFileName("alpha__home__runX.har")).toBe(false);
  });
});

describe("document shape", () => {
  it("emits HAR 1.2 with pages and ordered entries", () => {
    const later = record({ url: "http://site.test/late", startedAt: new Date("2026-08-19T10:00:01Z") });
    const har = buildHar([later, record()], {
      url: "http://site.test/",
      startedAt: new Date("2026-08-19T10:00:00Z"),
      onLoadMs: 180,
    }) as any;
    expect(har.log.version).toBe("1.2");
    expect(har.log.creator.name).toBe("capture-orchestrator");
    expect(har.log.pages).toHaveLength(1);
    expect(har.log.pages[0].pageTimings.onLoad).toBe(180);
    expect(har.log.entries).toHaveLength(2);
    // Sorted by start time despite insertion order.
    expect(har.log.entries[0].request.url).toBe("http://site.test/api/items");
    expect(har.log.entries[1].request.url).toBe("http://site.test/late");
  });

  it("carries headers, status, sizes and timing per entry", () => {
    const har = buildHar([record()], { url: "http://site.test/", startedAt: new Date() }) as any;
    const entry = har.log.entries[0];
    expect(entry.request.method).toBe("GET");
    expect(entry.request.headers).toEqual([{ name: "Accept", value: "application/json, text/plain, */*" }]);
    expect(entry.response.status).toBe(200);
    expect(entry.response.statusText).toBe("OK");
    expect(entry.response.headers).toContainEqual({ name: "Cache-Control", value: "no-store" });
    expect(entry.response.bodySize).toBe(120);
    expect(entry.response.content.size).toBe(340);
    expect(entry.response.content.mimeType).toBe("application/json");
    expect(entry.startedDateTime).toBe("2026-08-19T10:00:00.250Z");
    expect(entry.time).toBe(42.5);
  });

  it("never includes response body text", () => {
    const har = buildHar([record(), record({ url: "http://site.test/other" })], {
      url: "http://site.test/",
      startedAt: new Date(),
    });
    const scan = (node: unknown): void => {
      if (Array.isArray(node)) {
        node.forEach(scan);
        return;
      }
      if (typeof node === "object" && node !== null) {
        expect(Object.keys(node)).not.toContain("text");
        Object.values(node).forEach(scan);
      }
    };
    scan(har);
  });

  it("maps redirects and failures", () => {
    const redirect = record({
      url: "http://site.test/old",
      status: 301,
      responseHeaders: [{ name: "Location", value: "http://site.test/new" }],
      mimeType: "",
    });
    const failed = record({ url: "http://site.test/dead", status: 0, bodySize: -1, contentSize: -1 });
    const har = buildHar([redirect, failed], { url: "http://site.test/", startedAt: new Date() }) as any;
    expect(har.log.entries[0].response.redirectURL).toBe("http://site.test/new");
    expect(har.log.entries[0].response.statusText).toBe("Moved Permanently");
    expect(har.log.entries[1].response.status).toBe(0);
    expect(har.log.entries[1].response.bodySize).toBe(-1);
  });

  it("serializes deterministically with a trailing newline", () => {
    const har = buildHar([record()], { url: "http://site.test/", startedAt: new Date(0) });
    const first = serializeHar(har);
    const second = serializeHar(har);
    expect(first).toBe(second);
    expect(first.endsWith("\n")).toBe(true);
    expect(() => JSON.parse(first)).not.toThrow();
  });
});
