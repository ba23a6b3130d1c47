import { existsSync, mkdtempSync, readdirSync, readFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import * as path from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { makeConfig, type CaptureConfig, type ConfigSpec } from "../src/config";
import { DriverFailure, type ContextOptions, type PageContext, type PageDriver } from "../src/driver";
import { HttpPageDriver } from "../src/httpDriver";
import { capturePage, detectBlock, runBatch, type BatchResult } from "../src/orchestrator";
import { startTestServer, type TestServer } from "./testServer";

// Millisecond-scale pacing: same protocol, fast enough for CI. The
// post-scroll wait must outlast the server's lazy-banner delay (60 ms)
// so scroll-triggered loads finish before the HAR snapshot.
function fastSpec(overrides: Partial<ConfigSpec> = {}): Omit<ConfigSpec, "sites"> {
  return {
    runsPerPage: 3,
    networkIdleWaitMs: 600,
    networkIdleQuietMs: 80,
    scrollViewports: 3,
    scrollSettleMs: 25,
    postScrollWaitMs: 150,
    hardTimeoutMs: 5000,
    interRunDelayMs: 10,
    interSiteDelayMs: 10,
    ...overrides,
  };
}

function tempDir(): string {
  const dir = mkdtempSync(path.join(tmpdir(), "captest-"));
  cleanupDirs.push(dir);
  return dir;
}

const cleanupDirs: string[] = [];
let server: TestServer;

beforeAll(async () => {
  server = await startTestServer();
});

afterAll(async () => {
  await server.close();
  for (const dir of cleanupDirs) {
    rmSync(dir, { recursive: true, force: true });
  }
});

interface HarJson {
  log: {
    entries: Array<{
      startedDateTime: string;
      request: { url: string; headers: Array<{ name: string; value: string }> };
      response: {
        status: number;
        headers: Array<{ name: string; value: string }>;
        content: Record<string, unknown>;
        bodySize: number;
      };
    }>;
  };
}

function readHar(dir: string, name: string): HarJson {
  return JSON.parse(readFileSync(path.join(dir, name), "utf8")) as HarJson;
}

function requestHeader(entry: HarJson["log"]["entries"][number], name: string): string | undefined {
  return entry.request.headers.find((h) => h.name.toLowerCase() === name.toLowerCase())?.value;
}

function pathnameOf(url: string): string {
  return new URL(url).pathname;
}

describe("batch protocol conformance (3 runs x 2 pages)", () => {
  let outDir: string;
  let batch: BatchResult;
  const logLines: string[] = [];

  beforeAll(async () => {
    outDir = tempDir();
    const config = makeConfig({
      sites: [
        {
          id: "alpha",
          urls: [`${server.baseUrl}/`, `${server.baseUrl}/inner`],
          category: "News",
          architecture: "SSR",
        },
      ],
      outputDir: outDir,
      ...fastSpec(),
    });
    batch = await runBatch(config, { log: (line) => logLines.push(line) });
  });

  it("emits exactly 6 correctly named HAR files", () => {
    const expected = [
      "alpha__home__run1.har",
      "alpha__home__run2.har",
      "alpha__home__run3.har",
      "alpha__inner__run1.har",
      "alpha__inner__run2.har",
      "alpha__inner__run3.har",
    ];
    expect(batch.filesWritten.slice().sort()).toEqual(expected);
    const onDisk = readdirSync(outDir).filter((name) => name.endsWith(".har")).sort();
    expect(onDisk).toEqual(expected);
  });

  it("every emitted file is headers-only: no body text anywhere", () => {
    for (const name of batch.filesWritten) {
      const har = readHar(outDir, name);
      expect(har.log.entries.length).toBeGreaterThan(0);
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
    }
  });

  it("captures are stable: identical entry counts across a page's runs", () => {
    for (const page of ["home", "inner"]) {
      const counts = [1, 2, 3].map((run) => readHar(outDir, `alpha__${page}__run${run}.har`).log.entries.length);
      expect(new Set(counts).size).toBe(1);
    }
  });

  it("loads the document plus subresources, data fetches and lazy content", () => {
    for (const run of [1, 2, 3]) {
      const har = readHar(outDir, `alpha__home__run${run}.har`);
      const paths = har.log.entries.map((entry) => pathnameOf(entry.request.url));
      expect(paths).toContain("/");
      expect(paths).toContain("/static/app.js");
      expect(paths).toContain("/static/site.css");
      expect(paths).toContain("/static/logo.png");
      expect(paths).toContain("/api/items");
      expect(paths).toContain("/api/profile");
      // Only reachable by scrolling to step 2.
      expect(paths).toContain("/media/banner.jpg");
    }
  });

  it("marks script-initiated data fetches like a page runtime would", () => {
    const har = readHar(outDir, "alpha__home__run1.har");
    const apiEntry = har.log.entries.find((entry) => pathnameOf(entry.request.url) === "/api/items");
    expect(apiEntry).toBeDefined();
    expect(requestHeader(apiEntry!, "X-Requested-With")).toBe("XMLHttpRequest");
    expect(requestHeader(apiEntry!, "Accept")).toContain("application/json");
  });

  it("records wire size vs decoded size for compressed responses", () => {
    const har = readHar(outDir, "alpha__home__run1.har");
    const script = har.log.entries.find((entry) => pathnameOf(entry.request.url) === "/static/app.js");
    expect(script).toBeDefined();
    const size = script!.response.content.size as number;
    expect(script!.response.bodySize).toBeGreaterThan(0);
    expect(size).toBeGreaterThan(script!.response.bodySize);
  });

  it("isolates cookies: first request of every run carries none, later ones do", () => {
    const sessionValues = new Set<string>();
    for (const run of [1, 2, 3]) {
      const har = readHar(outDir, `alpha__home__run${run}.har`);
      const entries = [...har.log.entries].sort((a, b) =>
        a.startedDateTime.localeCompare(b.startedDateTime),
      );
      expect(pathnameOf(entries[0].request.url)).toBe("/");
      expect(requestHeader(entries[0], "Cookie")).toBeUndefined();

      const carried = entries.filter((entry) => requestHeader(entry, "Cookie") !== undefined);
      expect(carried.length).toBeGreaterThan(0);
      for (const entry of carried) {
        sessionValues.add(requestHeader(entry, "Cookie")!);
      }
    }
    // Three fresh contexts got three distinct sessions from the server.
    expect(sessionValues.size).toBe(3);
  });

  it("never leaks a session into a page that sets no cookie", () => {
    for (const run of [1, 2, 3]) {
      const har = readHar(outDir, `alpha__inner__run${run}.har`);
      for (const entry of har.log.entries) {
        expect(requestHeader(entry, "Cookie")).toBeUndefined();
      }
    }
  });

  it("confirms isolation on the server side too", () => {
    const documentHits = server.requests.filter((request) => request.path === "/");
    expect(documentHits.length).toBeGreaterThanOrEqual(3);
    for (const hit of documentHits) {
      expect(hit.headers.cookie).toBeUndefined();
    }
  });

  it("sends the configured user agent on every request", () => {
    const har = readHar(outDir, "alpha__inner__run2.har");
    for (const entry of har.log.entries) {
      expect(requestHeader(entry, "User-Agent")).toContain("Mozilla/5.0");
    }
  });

  it("writes a manifest the analysis side can load as its site manifest", () => {
    const manifest = JSON.parse(readFileSync(batch.manifestPath, "utf8"));
    expect(Array.isArray(manifest)).toBe(true);
    expect(manifest).toHaveLength(1);
    const site = manifest[0];
    expect(site.id).toBe("alpha");
    expect(site.domain).toBe("127.0.0.1");
    expect(site.category).toBe("News");
    expect(site.architecture).toBe("SSR");
    expect(site.pages).toEqual(["home", "inner"]);
    expect(site.exclusion).toBeUndefined();
    expect(site.captures).toHaveLength(6);
    for (const row of site.captures) {
      expect(row.outcome).toBe("success");
      expect(row.file).toBe(`alpha__${row.page}__run${row.run}.har`);
      expect(row.entries).toBeGreaterThan(0);
    }
  });

  it("logs one line per capture in visit order", () => {
    const captureLines = logLines.filter((line) => line.startsWith("alpha "));
    expect(captureLines).toHaveLength(6);
    expect(captureLines[0]).toMatch(/^alpha home run1: success/);
    expect(captureLines[5]).toMatch(/^alpha inner run3: success/);
  });
});

describe("outcome classification", () => {
  it("classifies blocking statuses and challenge pages from landing info", () => {
    expect(detectBlock(null)).toBeNull();
    expect(detectBlock({ status: 200, title: "Home", bodyText: "welcome" })).toBeNull();
    expect(detectBlock({ status: 401, title: "", bodyText: "" })).toBe("landing status 401");
    expect(detectBlock({ status: 403, title: "", bodyText: "" })).toBe("landing status 403");
    expect(detectBlock({ status: 429, title: "", bodyText: "" })).toBe("landing status 429");
    expect(detectBlock({ status: 200, title: "Security check", bodyText: "Complete the CAPTCHA" })).toMatch(
      /bot challenge/,
    );
    expect(detectBlock({ status: 200, title: "", bodyText: "please Verify You Are Human now" })).toMatch(
      /bot challenge/,
    );
  });

  it("a hanging page triggers the hard timeout outcome and leaves no file", async () => {
    const outDir = tempDir();
    const config = makeConfig({
      sites: [{ id: "stuck", pages: [{ label: "hang", url: `${server.baseUrl}/hang` }] }],
      outputDir: outDir,
      ...fastSpec({ runsPerPage: 1, hardTimeoutMs: 400, networkIdleWaitMs: 200 }),
    });
    const started = Date.now();
    const batch = await runBatch(config);
    expect(Date.now() - started).toBeGreaterThanOrEqual(390);

    expect(batch.filesWritten).toEqual([]);
    expect(readdirSync(outDir).filter((name) => name.endsWith(".har"))).toEqual([]);
    const [site] = batch.sites;
    expect(site.captures).toHaveLength(1);
    expect(site.captures[0].outcome).toBe("timeout");
    expect(site.captures[0].reason).toContain("hard timeout after 400 ms");
    expect(site.captures[0].file).toBeUndefined();
    expect(site.exclusion).toBe("no successful captures (1 timeout)");
  });

  it("a 403 landing is blocked with no HAR emitted", async () => {
    const outDir = tempDir();
    const config = makeConfig({
      sites: [{ id: "walled", pages: [{ label: "admin", url: `${server.baseUrl}/admin` }] }],
      outputDir: outDir,
      ...fastSpec({ runsPerPage: 1 }),
    });
    const batch = await runBatch(config);
    expect(batch.filesWritten).toEqual([]);
    const [site] = batch.sites;
    expect(site.captures[0].outcome).toBe("blocked");
    expect(site.captures[0].reason).toBe("landing status 403");
    expect(site.exclusion).toBe("no successful captures (1 blocked)");
  });

  it("a bot challenge page is blocked by keyword scan", async () => {
    const outDir = tempDir();
    const config = makeConfig({
      sites: [{ id: "guarded", pages: [{ label: "gate", url: `${server.baseUrl}/captcha` }] }],
      outputDir: outDir,
      ...fastSpec({ runsPerPage: 1 }),
    });
    const batch = await runBatch(config);
    expect(batch.filesWritten).toEqual([]);
    expect(batch.sites[0].captures[0].outcome).toBe("blocked");
    expect(batch.sites[0].captures[0].reason).toContain("bot challenge");
  });

  it("a partial site keeps its good captures and notes the gaps", async () => {
    const outDir = tempDir();
    const config = makeConfig({
      sites: [
        {
          id: "mixed",
          pages: [
            { label: "home", url: `${server.baseUrl}/` },
            { label: "stuck", url: `${server.baseUrl}/hang` },
          ],
        },
      ],
      outputDir: outDir,
      ...fastSpec({ runsPerPage: 2, hardTimeoutMs: 350, networkIdleWaitMs: 150, postScrollWaitMs: 80 }),
    });
    const batch = await runBatch(config);
    expect(batch.filesWritten.sort()).toEqual(["mixed__home__run1.har", "mixed__home__run2.har"]);
    const [site] = batch.sites;
    expect(site.exclusion).toBeUndefined();
    const byOutcome = site.captures.map((row) => row.outcome);
    expect(byOutcome).toEqual(["success", "success", "timeout", "timeout"]);
  });
});

describe("driver failure handling", () => {
  class FlakyDriver implements PageDriver {
    attempts = 0;
    constructor(
      private readonly inner: PageDriver,
      private failuresRemaining: number,
    ) {}
    async newContext(options: ContextOptions): Promise<PageContext> {
      this.attempts += 1;
      if (this.failuresRemaining > 0) {
        this.failuresRemaining -= 1;
        throw new DriverFailure("simulated crash");
      }
      return this.inner.newContext(options);
    }
  }

  it("retries a failed driver once and succeeds", async () => {
    const driver = new FlakyDriver(new HttpPageDriver(), 1);
    const config = makeConfig({
      sites: [{ id: "alpha", urls: [`${server.baseUrl}/inner`] }],
      outputDir: tempDir(),
      ...fastSpec({ runsPerPage: 1 }),
    });
    const outcome = await capturePage(driver, `${server.baseUrl}/inner`, config);
    expect(outcome.kind).toBe("success");
    expect(driver.attempts).toBe(2);
  });

  it("records failure after the second driver crash, not more attempts", async () => {
    const driver = new FlakyDriver(new HttpPageDriver(), Number.POSITIVE_INFINITY);
    const config = makeConfig({
      sites: [{ id: "alpha", urls: [`${server.baseUrl}/inner`] }],
      outputDir: tempDir(),
      ...fastSpec({ runsPerPage: 1 }),
    });
    const outcome = await capturePage(driver, `${server.baseUrl}/inner`, config);
    expect(outcome.kind).toBe("failure");
    expect(outcome.reason).toContain("driver failed twice");
    expect(outcome.reason).toContain("simulated crash");
    expect(driver.attempts).toBe(2);
  });

  it("recovers from a connection reset via the retry", async () => {
    // Dedicated server: the reset trap arms once per server instance.
    const local = await startTestServer();
    try {
      const outDir = tempDir();
      const config = makeConfig({
        sites: [{ id: "shaky", pages: [{ label: "flaky", url: `${local.baseUrl}/reset-once` }] }],
        outputDir: outDir,
        ...fastSpec({ runsPerPage: 1 }),
      });
      const batch = await runBatch(config);
      expect(batch.sites[0].captures[0].outcome).toBe("success");
      expect(batch.filesWritten).toEqual(["shaky__flaky__run1.har"]);
    } finally {
      await local.close();
    }
  });
});

describe("accessible-only reruns", () => {
  function twoSiteConfig(outDir: string): CaptureConfig {
    return makeConfig({
      sites: [
        { id: "open", pages: [{ label: "inner", url: `${server.baseUrl}/inner` }] },
        { id: "walled", pages: [{ label: "admin", url: `${server.baseUrl}/admin` }] },
      ],
      outputDir: outDir,
      ...fastSpec({ runsPerPage: 1 }),
    });
  }

  it("skips sites the previous manifest marked blocked or timed out", async () => {
    const outDir = tempDir();
    const config = twoSiteConfig(outDir);

    const first = await runBatch(config);
    expect(first.sites.find((site) => site.id === "walled")?.exclusion).toContain("no successful captures");
    const adminHitsAfterFirst = server.requests.filter((request) => request.path === "/admin").length;

    const second = await runBatch(config, { accessibleOnly: true });
    const walled = second.sites.find((site) => site.id === "walled");
    expect(walled?.captures).toEqual([]);
    expect(walled?.exclusion).toContain("accessible-only");
    const open = second.sites.find((site) => site.id === "open");
    expect(open?.captures[0]?.outcome).toBe("success");

    const adminHitsAfterSecond = server.requests.filter((request) => request.path === "/admin").length;
    expect(adminHitsAfterSecond).toBe(adminHitsAfterFirst);
  });

  it("skips nothing when no previous manifest exists", async () => {
    const outDir = tempDir();
    const config = makeConfig({
      sites: [{ id: "open", pages: [{ label: "inner", url: `${server.baseUrl}/inner` }] }],
      outputDir: outDir,
      ...fastSpec({ runsPerPage: 1 }),
    });
    const batch = await runBatch(config, { accessibleOnly: true });
    expect(batch.sites[0].captures[0].outcome).toBe("success");
  });
});

describe("network idle behavior", () => {
  it("waits out slow subresources before snapshotting", async () => {
    const outDir = tempDir();
    const config = makeConfig({
      sites: [{ id: "slowtown", pages: [{ label: "slow", url: `${server.baseUrl}/slow-page` }] }],
      outputDir: outDir,
      ...fastSpec({ runsPerPage: 1, networkIdleWaitMs: 900, networkIdleQuietMs: 80, hardTimeoutMs: 4000 }),
    });
    const batch = await runBatch(config);
    expect(batch.sites[0].captures[0].outcome).toBe("success");
    const har = readHar(outDir, "slowtown__slow__run1.har");
    const slow = har.log.entries.find((entry) => pathnameOf(entry.request.url) === "/slow.png");
    expect(slow).toBeDefined();
    expect(slow?.response.status).toBe(200);
  });
});
