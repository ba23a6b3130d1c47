/**
 * Capture run configuration.
 *
 * A run is described by the sites to visit (each a list of labeled page
 * URLs) plus the pacing of the visit protocol: runs per page, viewport,
 * network-idle budget, scroll depth, waits, the hard per-page timeout and
 * the delays between captures. Every duration has a protocol default and
 * is overridable, so tests can run the identical protocol at millisecond
 * scale.
 *
 * Site ids and page labels become HAR file name segments joined by "__",
 * so they must not contain that separator (or path characters).
 */

import { readFileSync } from "node:fs";

export class ConfigError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ConfigError";
  }
}

export interface PageTarget {
  label: string;
  url: string;
}

export interface SiteTarget {
  id: string;
  /** First-party domain for the outcomes manifest; defaults to the hostname of the first page URL. */
  domain: string;
  /** Passed through to the outcomes manifest for downstream analysis. */
  category: string;
  architecture: string;
  pages: PageTarget[];
}

export interface CaptureConfig {
  sites: SiteTarget[];
  runsPerPage: number;
  viewportWidth: number;
  viewportHeight: number;
  userAgent: string;
  /** Cap on the post-load network-idle wait. */
  networkIdleWaitMs: number;
  /** Quiet window that counts as idle: no network activity for this long. */
  networkIdleQuietMs: number;
  scrollViewports: number;
  /** Settle pause between scroll steps. */
  scrollSettleMs: number;
  postScrollWaitMs: number;
  /** Hard per-page budget; the context is force-closed when it fires. */
  hardTimeoutMs: number;
  interRunDelayMs: number;
  interSiteDelayMs: number;
  outputDir: string;
}

export const CONFIG_DEFAULTS = {
  runsPerPage: 3,
  viewportWidth: 1920,
  viewportHeight: 1080,
  userAgent:
    "Mozilla/5.0 (X11; Linux x86_64) AppleWebKit/537.36 (KHTML, like Gecko) " +
    "Chrome/120.0.0.0 Safari/537.36",
  networkIdleWaitMs: 5000,
  networkIdleQuietMs: 500,
  scrollViewports: 3,
  scrollSettleMs: 200,
  postScrollWaitMs: 3000,
  hardTimeoutMs: 90000,
  interRunDelayMs: 2000,
  interSiteDelayMs: 3000,
  outputDir: "captures",
} as const;

/** Programmatic site input: either labeled pages or bare URLs. */
export interface SiteSpec {
  id: string;
  urls?: string[];
  pages?: PageTarget[];
  domain?: string;
  category?: string;
  architecture?: string;
}

export type ConfigSpec = Partial<Omit<CaptureConfig, "sites">> & { sites: SiteSpec[] };

// Labels assigned to bare URL lists, in order. The common shape is two
// pages per site: the landing page and one interior page.
const AUTO_LABELS = ["home", "inner"];

// File name segments: word characters plus "." and "-"; "__" is the
// segment separator in HAR file names and is rejected separately.
const NAME_RE = /^[A-Za-z0-9][A-Za-z0-9_.-]*$/;

function checkNameSegment(kind: string, value: string): void {
  if (!NAME_RE.test(value)) {
    throw new ConfigError(`${kind} ${JSON.stringify(value)} must match ${NAME_RE}`);
  }
  if (value.includes("__")) {
    throw new ConfigError(`${kind} ${JSON.stringify(value)} must not contain "__"`);
  }
}

function checkUrl(siteId: string, raw: string): URL {
  let parsed: URL;
  try {
    parsed = new URL(raw);
  } catch {
    throw new ConfigError(`site ${JSON.stringify(siteId)}: invalid URL ${JSON.stringify(raw)}`);
  }
  if (parsed.protocol !== "http:" && parsed.protocol !== "https:") {
    throw new ConfigError(`site ${JSON.stringify(siteId)}: URL must be http(s): ${raw}`);
  }
  return parsed;
}

function autoLabel(index: number): string {
  return AUTO_LABELS[index] ?? `page${index + 1}`;
}

function normalizeSite(spec: SiteSpec): SiteTarget {
  if (!spec.id || typeof spec.id !== "string") {
    throw new ConfigError("every site needs a non-empty string id");
  }
  checkNameSegment("site id", spec.id);

  let pages: PageTarget[];
  if (spec.pages !== undefined && spec.urls !== undefined) {
    throw new ConfigError(`site ${JSON.stringify(spec.id)}: give either "pages" or "urls", not both`);
  } else if (spec.pages !== undefined) {
    pages = spec.pages.map((page) => ({ label: page.label, url: page.url }));
  } else if (spec.urls !== undefined) {
    pages = spec.urls.map((url, index) => ({ label: autoLabel(index), url }));
  } else {
    throw new ConfigError(`site ${JSON.stringify(spec.id)}: needs "pages" or "urls"`);
  }
  if (pages.length === 0) {
    throw new ConfigError(`site ${JSON.stringify(spec.id)}: needs at least one page`);
  }

  const seenLabels = new Set<string>();
  let firstHost = "";
  for (const page of pages) {
    if (!page.label || typeof page.label !== "string") {
      throw new ConfigError(`site ${JSON.stringify(spec.id)}: every page needs a label`);
    }
    checkNameSegment("page label", page.label);
    if (seenLabels.has(page.label)) {
      throw new ConfigError(`site ${JSON.stringify(spec.id)}: duplicate page label ${JSON.stringify(page.label)}`);
    }
    seenLabels.add(page.label);
    const parsed = checkUrl(spec.id, page.url);
    if (!firstHost) {
      firstHost = parsed.hostname;
    }
  }

  const domain = (spec.domain ?? firstHost).toLowerCase();
  if (!domain) {
    throw new ConfigError(`site ${JSON.stringify(spec.id)}: empty domain`);
  }
  return {
    id: spec.id,
    domain,
    category: spec.category ?? "Uncategorized",
    architecture: spec.architecture ?? "",
    pages,
  };
}

function checkCount(name: string, value: number, minimum: number): void {
  if (!Number.isInteger(value) || value < minimum) {
    throw new ConfigError(`${name} must be an integer >= ${minimum}, got ${value}`);
  }
}

/** Fill defaults, validate invariants, and freeze a usable config. */
export function makeConfig(spec: ConfigSpec): CaptureConfig {
  if (!Array.isArray(spec.sites) || spec.sites.length === 0) {
    throw new ConfigError("config needs a non-empty sites list");
  }
  const sites = spec.sites.map(normalizeSite);
  const seenIds = new Set<string>();
  for (const site of sites) {
    if (seenIds.has(site.id)) {
      throw new ConfigError(`duplicate site id ${JSON.stringify(site.id)}`);
    }
    seenIds.add(site.id);
  }

  const config: CaptureConfig = {
    sites,
    runsPerPage: spec.runsPerPage ?? CONFIG_DEFAULTS.runsPerPage,
    viewportWidth: spec.viewportWidth ?? CONFIG_DEFAULTS.viewportWidth,
    viewportHeight: spec.viewportHeight ?? CONFIG_DEFAULTS.viewportHeight,
    userAgent: spec.userAgent ?? CONFIG_DEFAULTS.userAgent,
    networkIdleWaitMs: spec.networkIdleWaitMs ?? CONFIG_DEFAULTS.networkIdleWaitMs,
    networkIdleQuietMs: spec.networkIdleQuietMs ?? CONFIG_DEFAULTS.networkIdleQuietMs,
    scrollViewports: spec.scrollViewports ?? CONFIG_DEFAULTS.scrollViewports,
    scrollSettleMs: spec.scrollSettleMs ?? CONFIG_DEFAULTS.scrollSettleMs,
    postScrollWaitMs: spec.postScrollWaitMs ?? CONFIG_DEFAULTS.postScrollWaitMs,
    hardTimeoutMs: spec.hardTimeoutMs ?? CONFIG_DEFAULTS.hardTimeoutMs,
    interRunDelayMs: spec.interRunDelayMs ?? CONFIG_DEFAULTS.interRunDelayMs,
    interSiteDelayMs: spec.interSiteDelayMs ?? CONFIG_DEFAULTS.interSiteDelayMs,
    outputDir: spec.outputDir ?? CONFIG_DEFAULTS.outputDir,
  };

  checkCount("runsPerPage", config.runsPerPage, 1);
  checkCount("viewportWidth", config.viewportWidth, 1);
  checkCount("viewportHeight", config.viewportHeight, 1);
  checkCount("networkIdleWaitMs", config.networkIdleWaitMs, 0);
  checkCount("networkIdleQuietMs", config.networkIdleQuietMs, 0);
  checkCount("scrollViewports", config.scrollViewports, 0);
  checkCount("scrollSettleMs", config.scrollSettleMs, 0);
  checkCount("postScrollWaitMs", config.postScrollWaitMs, 0);
  checkCount("hardTimeoutMs", config.hardTimeoutMs, 1);
  checkCount("interRunDelayMs", config.interRunDelayMs, 0);
  checkCount("interSiteDelayMs", config.interSiteDelayMs, 0);
  if (config.hardTimeoutMs <= config.networkIdleWaitMs) {
    throw new ConfigError(
      `hardTimeoutMs (${config.hardTimeoutMs}) must exceed networkIdleWaitMs (${config.networkIdleWaitMs})`,
    );
  }
  if (typeof config.userAgent !== "string" || !config.userAgent) {
    throw new ConfigError("userAgent must be a non-empty string");
  }
  if (typeof config.outputDir !== "string" || !config.outputDir) {
    throw new ConfigError("outputDir must be a non-empty string");
  }
  return config;
}

// Config files use snake_case keys; this maps them onto ConfigSpec.
const FILE_KEYS: Record<string, keyof Omit<ConfigSpec, "sites">> = {
  runs_per_page: "runsPerPage",
  user_agent: "userAgent",
  network_idle_wait_ms: "networkIdleWaitMs",
  network_idle_quiet_ms: "networkIdleQuietMs",
  scroll_viewports: "scrollViewports",
  scroll_settle_ms: "scrollSettleMs",
  post_scroll_wait_ms: "postScrollWaitMs",
  hard_timeout_ms: "hardTimeoutMs",
  inter_run_delay_ms: "interRunDelayMs",
  inter_site_delay_ms: "interSiteDelayMs",
  output_dir: "outputDir",
};

/** Parse a JSON config document (snake_case keys, viewport as {width, height}). */
export function parseConfigDocument(raw: unknown): CaptureConfig {
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new ConfigError("config document must be a JSON object");
  }
  const doc = raw as Record<string, unknown>;
  const spec: Record<string, unknown> = { sites: doc.sites };
  for (const [fileKey, specKey] of Object.entries(FILE_KEYS)) {
    if (doc[fileKey] !== undefined) {
      spec[specKey] = doc[fileKey];
    }
  }
  if (doc.viewport !== undefined) {
    const viewport = doc.viewport as { width?: unknown; height?: unknown };
    spec.viewportWidth = viewport.width;
    spec.viewportHeight = viewport.height;
  }
  return makeConfig(spec as unknown as ConfigSpec);
}

export function loadConfig(path: string): CaptureConfig {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new ConfigError(`cannot read config ${path}: ${(err as Error).message}`);
  }
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (err) {
    throw new ConfigError(`config ${path} is not valid JSON: ${(err as Error).message}`);
  }
  return parseConfigDocument(raw);
}
