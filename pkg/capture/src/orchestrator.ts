/**
 * Visit protocol, outcome classification, and batch sequencing.
 *
 * One capture is one page visit in a fresh context:
 *
 *   navigate -> document loaded -> network idle (quiet window, capped) ->
 *   N viewport scrolls with settle pauses -> post-scroll wait ->
 *   scroll to top -> snapshot headers-only HAR -> close context
 *
 * Outcomes: success (HAR kept), blocked (401/403/429 landing or a bot
 * challenge page; no HAR), timeout (hard budget fired; the context is
 * force-closed and the partial capture discarded), failure (driver failed
 * twice). Only driver failures are retried, and only once, in a brand-new
 * context.
 *
 * Batches run strictly sequentially with configured delays between runs
 * and sites, and end by writing `capture_manifest.json`: a JSON array of
 * site records (id, domain, category, architecture, pages, per-capture
 * outcomes, exclusion when a site produced no successful capture). The
 * array doubles as the site manifest the downstream HAR analyzer takes.
 */

import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import * as path from "node:path";
import type { CaptureConfig } from "./config";
import type { LandingInfo, PageContext, PageDriver } from "./driver";
import { buildHar, harFileName, serializeHar } from "./har";
import { HttpPageDriver } from "./httpDriver";

export type OutcomeKind = "success" | "blocked" | "timeout" | "failure";

export interface CaptureOutcome {
  kind: OutcomeKind;
  /** Human-readable cause for non-success outcomes. */
  reason?: string;
  /** Number of HAR entries; success only. */
  entryCount?: number;
  /** Where the HAR was written; success only, and only when a path was given. */
  harPath?: string;
}

export const BLOCKING_STATUSES = [401, 403, 429] as const;

/** Case-insensitive markers of bot-challenge interstitials. Overridable per call. */
export const BOT_CHALLENGE_KEYWORDS = ["captcha", "verify you are human"] as const;

export interface CapturePageOptions {
  /** Write the HAR here on success. Omit to keep the capture in memory only. */
  harPath?: string;
  /** Override the default bot-challenge keyword list. */
  challengeKeywords?: readonly string[];
}

const MANIFEST_NAME = "capture_manifest.json";

// Marker for "the hard timeout fired"; never leaves capturePage.
class CaptureAbandoned extends Error {
  constructor() {
    super("capture abandoned after hard timeout");
    this.name = "CaptureAbandoned";
  }
}

function sleep(ms: number, signal?: AbortSignal): Promise<void> {
  if (ms <= 0 || signal?.aborted) {
    return Promise.resolve();
  }
  return new Promise((resolve) => {
    const timer = setTimeout(done, ms);
    function done(): void {
      clearTimeout(timer);
      signal?.removeEventListener("abort", done);
      resolve();
    }
    signal?.addEventListener("abort", done);
  });
}

/** Reason the landing counts as blocked, or null when it does not. */
export function detectBlock(
  landing: LandingInfo | null,
  keywords: readonly string[] = BOT_CHALLENGE_KEYWORDS,
): string | null {
  if (!landing) {
    return null;
  }
  if ((BLOCKING_STATUSES as readonly number[]).includes(landing.status)) {
    return `landing status ${landing.status}`;
  }
  const haystack = `${landing.title} ${landing.bodyText}`.toLowerCase();
  for (const keyword of keywords) {
    if (haystack.includes(keyword.toLowerCase())) {
      return `bot challenge detected (${JSON.stringify(keyword)})`;
    }
  }
  return null;
}

/**
 * One visit attempt in a fresh context. Returns the outcome, or throws
 * when the driver itself failed (the caller decides whether to retry).
 */
async function attemptCapture(
  driver: PageDriver,
  url: string,
  config: CaptureConfig,
  options: CapturePageOptions,
): Promise<CaptureOutcome> {
  const context: PageContext = await driver.newContext({
    viewportWidth: config.viewportWidth,
    viewportHeight: config.viewportHeight,
    userAgent: config.userAgent,
  });

  // The abandon signal fires with the hard timeout: the losing protocol
  // branch must stop at its next stage boundary and never write output.
  const abandon = new AbortController();
  let timer: NodeJS.Timeout | undefined;
  const timeoutPromise = new Promise<"timeout">((resolve) => {
    timer = setTimeout(() => {
      abandon.abort();
      resolve("timeout");
    }, config.hardTimeoutMs);
  });
  const guard = (): void => {
    if (abandon.signal.aborted) {
      throw new CaptureAbandoned();
    }
  };

  const protocol = (async (): Promise<CaptureOutcome> => {
    await context.navigate(url);
    guard();

    const blockReason = detectBlock(context.landing(), options.challengeKeywords);
    if (blockReason) {
      return { kind: "blocked", reason: blockReason };
    }

    await context.waitForNetworkIdle(config.networkIdleQuietMs, config.networkIdleWaitMs);
    guard();
    for (let step = 0; step < config.scrollViewports; step++) {
      await context.scrollByViewport();
      await sleep(config.scrollSettleMs, abandon.signal);
      guard();
    }
    await sleep(config.postScrollWaitMs, abandon.signal);
    guard();
    await context.scrollToTop();
    guard();

    const records = context.records();
    const har = buildHar(records, { url, startedAt: records[0]?.startedAt ?? new Date() });
    if (options.harPath) {
      writeFileSync(options.harPath, serializeHar(har), "utf8");
    }
    return { kind: "success", entryCount: records.length, harPath: options.harPath };
  })();

  try {
    const winner = await Promise.race([protocol, timeoutPromise]);
    if (winner === "timeout") {
      protocol.catch(() => undefined);
      context.forceClose();
      return {
        kind: "timeout",
        reason: `hard timeout after ${config.hardTimeoutMs} ms; partial capture discarded`,
      };
    }
    await context.close();
    return winner;
  } catch (err) {
    protocol.catch(() => undefined);
    context.forceClose();
    throw err;
  } finally {
    clearTimeout(timer);
  }
}

/**
 * Capture one page: run the visit protocol with the hard-timeout budget,
 * retrying a failed driver exactly once in a new context.
 */
export async function capturePage(
  driver: PageDriver,
  url: string,
  config: CaptureConfig,
  options: CapturePageOptions = {},
): Promise<CaptureOutcome> {
  let lastFailure = "";
  for (let attempt = 1; attempt <= 2; attempt++) {
    try {
      return await attemptCapture(driver, url, config, options);
    } catch (err) {
      lastFailure = err instanceof Error ? err.message : String(err);
    }
  }
  return { kind: "failure", reason: `driver failed twice: ${lastFailure}` };
}

// --- batch ----------------------------------------------------------------

export interface CaptureRow {
  page: string;
  run: number;
  outcome: OutcomeKind;
  file?: string;
  entries?: number;
  reason?: string;
}

/** One manifest record: analyzer-facing site fields plus capture outcomes. */
export interface SiteResult {
  id: string;
  domain: string;
  category: string;
  architecture: string;
  pages: string[];
  captures: CaptureRow[];
  exclusion?: string;
}

export interface BatchResult {
  outputDir: string;
  manifestPath: string;
  sites: SiteResult[];
  filesWritten: string[];
}

export interface RunBatchOptions {
  driver?: PageDriver;
  /** Skip sites the previous manifest in the output directory marked blocked or timed out. */
  accessibleOnly?: boolean;
  log?: (line: string) => void;
}

function summarizeKinds(rows: CaptureRow[]): string {
  const counts = new Map<OutcomeKind, number>();
  for (const row of rows) {
    counts.set(row.outcome, (counts.get(row.outcome) ?? 0) + 1);
  }
  return [...counts.entries()].map(([kind, count]) => `${count} ${kind}`).join(", ");
}

/** Site ids the previous manifest marked blocked or timed out. */
function previouslyInaccessible(manifestPath: string): Set<string> {
  let raw: unknown;
  try {
    raw = JSON.parse(readFileSync(manifestPath, "utf8"));
  } catch {
    return new Set();
  }
  const skip = new Set<string>();
  if (!Array.isArray(raw)) {
    return skip;
  }
  for (const row of raw) {
    if (typeof row !== "object" || row === null) {
      continue;
    }
    const site = row as { id?: unknown; exclusion?: unknown; captures?: unknown };
    if (typeof site.id !== "string") {
      continue;
    }
    const captures = Array.isArray(site.captures) ? site.captures : [];
    const hadBlockOrTimeout = captures.some(
      (capture) =>
        typeof capture === "object" &&
        capture !== null &&
        ["blocked", "timeout"].includes((capture as { outcome?: string }).outcome ?? ""),
    );
    if (typeof site.exclusion === "string" || hadBlockOrTimeout) {
      skip.add(site.id);
    }
  }
  return skip;
}

/**
 * Visit every configured site sequentially and write the HAR files plus
 * the outcomes manifest.
 */
export async function runBatch(config: CaptureConfig, options: RunBatchOptions = {}): Promise<BatchResult> {
  const driver = options.driver ?? new HttpPageDriver();
  const log = options.log ?? ((): void => undefined);
  mkdirSync(config.outputDir, { recursive: true });
  const manifestPath = path.join(config.outputDir, MANIFEST_NAME);

  const skipIds = options.accessibleOnly ? previouslyInaccessible(manifestPath) : new Set<string>();
  const sites: SiteResult[] = [];
  const filesWritten: string[] = [];
  let visitedAnySite = false;

  for (const site of config.sites) {
    if (skipIds.has(site.id)) {
      log(`${site.id}: skipped (previously blocked or timed out)`);
      sites.push({
        id: site.id,
        domain: site.domain,
        category: site.category,
        architecture: site.architecture,
        pages: site.pages.map((page) => page.label),
        captures: [],
        exclusion: "skipped: previously blocked or timed out (accessible-only)",
      });
      continue;
    }

    if (visitedAnySite) {
      await sleep(config.interSiteDelayMs);
    }
    visitedAnySite = true;

    const rows: CaptureRow[] = [];
    let firstCapture = true;
    for (const page of site.pages) {
      for (let run = 1; run <= config.runsPerPage; run++) {
        if (!firstCapture) {
          await sleep(config.interRunDelayMs);
        }
        firstCapture = false;

        const fileName = harFileName(site.id, page.label, run);
        const outcome = await capturePage(driver, page.url, config, {
          harPath: path.join(config.outputDir, fileName),
        });
        if (outcome.kind === "success") {
          filesWritten.push(fileName);
          rows.push({ page: page.label, run, outcome: outcome.kind, file: fileName, entries: outcome.entryCount });
          log(`${site.id} ${page.label} run${run}: success (${outcome.entryCount} entries)`);
        } else {
          rows.push({ page: page.label, run, outcome: outcome.kind, reason: outcome.reason });
          log(`${site.id} ${page.label} run${run}: ${outcome.kind} (${outcome.reason})`);
        }
      }
    }

    const result: SiteResult = {
      id: site.id,
      domain: site.domain,
      category: site.category,
      architecture: site.architecture,
      pages: site.pages.map((page) => page.label),
      captures: rows,
    };
    if (!rows.some((row) => row.outcome === "success")) {
      result.exclusion = `no successful captures (${summarizeKinds(rows)})`;
    }
    sites.push(result);
  }

  writeFileSync(manifestPath, JSON.stringify(sites, null, 2) + "\n", "utf8");
  return { outputDir: config.outputDir, manifestPath, sites, filesWritten };
}
