/**
 * Driver abstraction: the seam between the visit protocol and whatever
 * actually loads pages.
 *
 * The orchestrator only ever talks to PageDriver/PageContext, so the
 * protocol, outcome classification, retry policy and batch sequencing are
 * driver-agnostic. A context represents a fresh, isolated browsing
 * session: no cookies or cache survive from any previous context, and
 * closing it ends all of its network activity.
 *
 * Network activity is observed as headers-only NetworkRecords; response
 * bodies are never retained, only counted.
 */

export interface HeaderPair {
  name: string;
  value: string;
}

/** One completed (or failed) request/response, headers and sizes only. */
export interface NetworkRecord {
  method: string;
  url: string;
  /** 0 means the request never completed. */
  status: number;
  requestHeaders: HeaderPair[];
  responseHeaders: HeaderPair[];
  mimeType: string;
  /** Encoded bytes received on the wire; -1 when unknown. */
  bodySize: number;
  /** Decoded content bytes; -1 when unknown. */
  contentSize: number;
  startedAt: Date;
  durationMs: number;
}

/** What the main document settled on, for outcome classification. */
export interface LandingInfo {
  status: number;
  title: string;
  /** Tag-stripped visible text, truncated; enough for keyword scans. */
  bodyText: string;
}

export interface ContextOptions {
  viewportWidth: number;
  viewportHeight: number;
  userAgent: string;
}

export interface PageContext {
  /** Navigate and resolve once the document and its blocking subresources loaded. */
  navigate(url: string): Promise<void>;
  /**
   * Wait until no network activity for quietMs, giving up after capMs.
   * Returns normally either way; the cap is a budget, not an error.
   */
  waitForNetworkIdle(quietMs: number, capMs: number): Promise<void>;
  /** Scroll down one viewport height, triggering any lazy loads due at this depth. */
  scrollByViewport(): Promise<void>;
  scrollToTop(): Promise<void>;
  /** Landing info for the last navigation, or null before any navigation. */
  landing(): LandingInfo | null;
  /** Snapshot of completed network records, in start order. */
  records(): NetworkRecord[];
  /** Graceful shutdown: lets in-flight requests drain briefly, then stops. */
  close(): Promise<void>;
  /** Immediate shutdown: aborts all in-flight requests. */
  forceClose(): void;
}

export interface PageDriver {
  /** Open a fresh isolated context (no cookies, no cache). */
  newContext(options: ContextOptions): Promise<PageContext>;
}

/**
 * Infrastructure failure of the driver itself (crash, dead connection),
 * as opposed to a page that loads but is blocked or slow. The
 * orchestrator retries these once in a new context.
 */
export class DriverFailure extends Error {
  constructor(message: string) {
    super(message);
    this.name = "DriverFailure";
  }
}
