/**
 * Protocol-level page driver.
 *
 * Speaks plain HTTP instead of driving a real browser. A navigation
 * fetches the document and then loads subresources the way a browser
 * would: scripts and stylesheets are awaited before navigation resolves
 * (document-loaded), images load in the background and are covered by
 * the network-idle wait, declared data fetches fire like page scripts
 * would, and lazily marked resources load only once scrolling reaches
 * their depth. Cookies live in a per-context jar and die with the
 * context, mirroring a fresh browser profile.
 *
 * Markup conventions the driver honors:
 *   <script src=...> / <link rel="stylesheet" href=...>  blocking load
 *   <img src=...>                                        background load
 *   any element with data-fetch-src=...                  JSON fetch (XHR-style)
 *   any element with data-lazy-src=...                   loads at scroll step N
 *       (data-lazy-step="N", default 1)
 *
 * A real browser binding would implement the same PageDriver interface;
 * everything above this module is driver-agnostic.
 */

import * as http from "node:http";
import * as https from "node:https";
import * as zlib from "node:zlib";
import {
  DriverFailure,
  type ContextOptions,
  type HeaderPair,
  type LandingInfo,
  type NetworkRecord,
  type PageContext,
  type PageDriver,
} from "./driver";

// Internal marker: the context was force-closed while this request was in
// flight. Never escapes the driver as a DriverFailure.
class RequestAborted extends Error {
  constructor() {
    super("request aborted by context shutdown");
    this.name = "RequestAborted";
  }
}

type ResourceKind = "document" | "script" | "stylesheet" | "image" | "fetch";

const ACCEPT_BY_KIND: Record<ResourceKind, string> = {
  document: "text/html,application/xhtml+xml,application/xml;q=0.9,*/*;q=0.8",
  script: "*/*",
  stylesheet: "text/css,*/*;q=0.1",
  image: "image/avif,image/webp,image/png,image/*,*/*;q=0.8",
  fetch: "application/json, text/plain, */*",
};

const MAX_REDIRECTS = 5;
const TAG_RE = /<([a-zA-Z][a-zA-Z0-9-]*)\b([^<>]*)>/g;
const ATTR_RE = /([a-zA-Z_][a-zA-Z0-9_-]*)\s*=\s*"([^"]*)"/g;
const TITLE_RE = /<title[^>]*>([^<]*)<\/title>/i;
const BODY_TEXT_LIMIT = 8192;

interface FetchResult {
  status: number;
  responseHeaders: HeaderPair[];
  body: Buffer;
}

interface LazyResource {
  url: string;
  step: number;
}

function attributesOf(tagBody: string): Record<string, string> {
  const attrs: Record<string, string> = {};
  for (const match of tagBody.matchAll(ATTR_RE)) {
    attrs[match[1].toLowerCase()] = match[2];
  }
  return attrs;
}

function stripTags(html: string): string {
  return html
    .replace(/<script[\s\S]*?<\/script>/gi, " ")
    .replace(/<style[\s\S]*?<\/style>/gi, " ")
    .replace(/<[^>]+>/g, " ")
    .replace(/\s+/g, " ")
    .trim()
    .slice(0, BODY_TEXT_LIMIT);
}

function decodedSize(body: Buffer, contentEncoding: string): number {
  const encoding = contentEncoding.trim().toLowerCase();
  try {
    if (encoding === "gzip" || encoding === "x-gzip") {
      return zlib.gunzipSync(body).length;
    }
    if (encoding === "br") {
      return zlib.brotliDecompressSync(body).length;
    }
    if (encoding === "deflate") {
      return zlib.inflateSync(body).length;
    }
  } catch {
    // Corrupt encoding: fall through and report the wire size.
  }
  return body.length;
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

class HttpContext implements PageContext {
  private readonly jar = new Map<string, Map<string, string>>();
  private readonly recordsList: NetworkRecord[] = [];
  private readonly aborter = new AbortController();
  private readonly lazyQueue: LazyResource[] = [];
  private inFlight = 0;
  private lastActivity = Date.now();
  private closed = false;
  private landingInfo: LandingInfo | null = null;
  private documentUrl = "";
  private scrollStep = 0;

  constructor(private readonly options: ContextOptions) {}

  // --- cookie jar -------------------------------------------------------

  private cookieHeaderFor(host: string): string {
    const cookies = this.jar.get(host);
    if (!cookies || cookies.size === 0) {
      return "";
    }
    return [...cookies.entries()].map(([name, value]) => `${name}=${value}`).join("; ");
  }

  private storeCookies(host: string, responseHeaders: HeaderPair[]): void {
    for (const header of responseHeaders) {
      if (header.name.toLowerCase() !== "set-cookie") {
        continue;
      }
      const pair = header.value.split(";", 1)[0];
      const eq = pair.indexOf("=");
      if (eq <= 0) {
        continue;
      }
      const name = pair.slice(0, eq).trim();
      const value = pair.slice(eq + 1).trim();
      let cookies = this.jar.get(host);
      if (!cookies) {
        cookies = new Map();
        this.jar.set(host, cookies);
      }
      cookies.set(name, value);
    }
  }

  // --- low-level fetch ---------------------------------------------------

  private requestHeadersFor(url: URL, kind: ResourceKind): HeaderPair[] {
    const headers: HeaderPair[] = [
      { name: "Host", value: url.host },
      { name: "User-Agent", value: this.options.userAgent },
      { name: "Accept", value: ACCEPT_BY_KIND[kind] },
      { name: "Accept-Encoding", value: "gzip, deflate, br" },
    ];
    const cookie = this.cookieHeaderFor(url.hostname);
    if (cookie) {
      headers.push({ name: "Cookie", value: cookie });
    }
    if (kind !== "document" && this.documentUrl) {
      headers.push({ name: "Referer", value: this.documentUrl });
    }
    if (kind === "fetch") {
      headers.push({ name: "X-Requested-With", value: "XMLHttpRequest" });
    }
    return headers;
  }

  /** One HTTP exchange; records the entry and returns the raw result. */
  private performRequest(url: URL, kind: ResourceKind): Promise<FetchResult> {
    const requestHeaders = this.requestHeadersFor(url, kind);
    const startedAt = new Date();
    const t0 = Date.now();
    this.inFlight += 1;
    this.lastActivity = t0;

    const finish = (record: NetworkRecord): void => {
      this.recordsList.push(record);
      this.inFlight -= 1;
      this.lastActivity = Date.now();
    };
    const dropped = (): void => {
      this.inFlight -= 1;
      this.lastActivity = Date.now();
    };

    return new Promise<FetchResult>((resolve, reject) => {
      const transport = url.protocol === "https:" ? https : http;
      const headerObject: Record<string, string> = {};
      for (const pair of requestHeaders) {
        headerObject[pair.name] = pair.value;
      }
      // Sockets can error after the exchange completed; settle only once.
      let settled = false;
      const request = transport.request(
        url,
        { method: "GET", headers: headerObject, signal: this.aborter.signal, agent: false },
        (response) => {
          const chunks: Buffer[] = [];
          response.on("data", (chunk: Buffer) => {
            chunks.push(chunk);
            this.lastActivity = Date.now();
          });
          response.on("error", () => {
            if (settled) {
              return;
            }
            settled = true;
            dropped();
            reject(this.aborter.signal.aborted ? new RequestAborted() : new DriverFailure(`response stream failed for ${url}`));
          });
          response.on("end", () => {
            if (settled) {
              return;
            }
            settled = true;
            const body = Buffer.concat(chunks);
            const responseHeaders: HeaderPair[] = [];
            for (let i = 0; i + 1 < response.rawHeaders.length; i += 2) {
              responseHeaders.push({ name: response.rawHeaders[i], value: response.rawHeaders[i + 1] });
            }
            const contentType = response.headers["content-type"] ?? "";
            const contentEncoding = response.headers["content-encoding"] ?? "";
            this.storeCookies(url.hostname, responseHeaders);
            finish({
              method: "GET",
              url: url.toString(),
              status: response.statusCode ?? 0,
              requestHeaders,
              responseHeaders,
              mimeType: contentType,
              bodySize: body.length,
              contentSize: decodedSize(body, contentEncoding),
              startedAt,
              durationMs: Date.now() - t0,
            });
            resolve({
              status: response.statusCode ?? 0,
              responseHeaders,
              body,
            });
          });
        },
      );
      request.on("error", (err: Error) => {
        if (settled) {
          return;
        }
        settled = true;
        if (this.aborter.signal.aborted) {
          dropped();
          reject(new RequestAborted());
          return;
        }
        // Connection-level failure: record the entry as never completed.
        finish({
          method: "GET",
          url: url.toString(),
          status: 0,
          requestHeaders,
          responseHeaders: [],
          mimeType: "",
          bodySize: -1,
          contentSize: -1,
          startedAt,
          durationMs: Date.now() - t0,
        });
        reject(new DriverFailure(`request to ${url} failed: ${err.message}`));
      });
      request.end();
    });
  }

  /** Fetch following redirects; every hop is recorded as its own entry. */
  private async fetchResource(rawUrl: string, kind: ResourceKind): Promise<FetchResult> {
    let url = new URL(rawUrl);
    let result = await this.performRequest(url, kind);
    for (let hop = 0; hop < MAX_REDIRECTS; hop++) {
      if (result.status < 300 || result.status >= 400) {
        return result;
      }
      const location = result.responseHeaders.find((h) => h.name.toLowerCase() === "location");
      if (!location || !location.value) {
        return result;
      }
      url = new URL(location.value, url);
      result = await this.performRequest(url, kind);
    }
    return result;
  }

  /**
   * Background subresource load: failures become status-0 records (the
   * page survives a broken image), aborts are silent.
   */
  private subfetch(rawUrl: string, kind: ResourceKind): Promise<void> {
    return this.fetchResource(rawUrl, kind).then(
      () => undefined,
      (err) => {
        if (err instanceof RequestAborted) {
          return;
        }
        // performRequest already recorded the failed entry.
      },
    );
  }

  // --- PageContext -------------------------------------------------------

  async navigate(rawUrl: string): Promise<void> {
    if (this.closed) {
      throw new DriverFailure("context is closed");
    }
    this.documentUrl = rawUrl;
    let result: FetchResult;
    try {
      result = await this.fetchResource(rawUrl, "document");
    } catch (err) {
      if (err instanceof RequestAborted) {
        throw err;
      }
      throw err instanceof DriverFailure ? err : new DriverFailure(String(err));
    }

    const contentType = result.responseHeaders.find((h) => h.name.toLowerCase() === "content-type");
    const isHtml = (contentType?.value ?? "").toLowerCase().includes("text/html");
    const html = isHtml ? result.body.toString("utf8") : "";
    this.landingInfo = {
      status: result.status,
      title: TITLE_RE.exec(html)?.[1]?.trim() ?? "",
      bodyText: isHtml ? stripTags(html) : "",
    };

    if (!isHtml) {
      return;
    }

    const blocking: Array<Promise<void>> = [];
    for (const match of html.matchAll(TAG_RE)) {
      const tag = match[1].toLowerCase();
      const attrs = attributesOf(match[2]);
      const resolveUrl = (value: string): string | null => {
        try {
          const resolved = new URL(value, rawUrl);
          return resolved.protocol === "http:" || resolved.protocol === "https:" ? resolved.toString() : null;
        } catch {
          return null;
        }
      };

      if (attrs["data-lazy-src"]) {
        const lazyUrl = resolveUrl(attrs["data-lazy-src"]);
        if (lazyUrl) {
          const step = Number.parseInt(attrs["data-lazy-step"] ?? "1", 10);
          this.lazyQueue.push({ url: lazyUrl, step: Number.isNaN(step) ? 1 : step });
        }
        continue;
      }
      if (attrs["data-fetch-src"]) {
        const fetchUrl = resolveUrl(attrs["data-fetch-src"]);
        if (fetchUrl) {
          void this.subfetch(fetchUrl, "fetch");
        }
        continue;
      }
      if (tag === "script" && attrs.src) {
        const scriptUrl = resolveUrl(attrs.src);
        if (scriptUrl) {
          blocking.push(this.subfetch(scriptUrl, "script"));
        }
      } else if (tag === "link" && (attrs.rel ?? "").toLowerCase() === "stylesheet" && attrs.href) {
        const cssUrl = resolveUrl(attrs.href);
        if (cssUrl) {
          blocking.push(this.subfetch(cssUrl, "stylesheet"));
        }
      } else if (tag === "img" && attrs.src) {
        const imageUrl = resolveUrl(attrs.src);
        if (imageUrl) {
          void this.subfetch(imageUrl, "image");
        }
      }
    }
    await Promise.all(blocking);
  }

  async waitForNetworkIdle(quietMs: number, capMs: number): Promise<void> {
    const started = Date.now();
    while (!this.aborter.signal.aborted) {
      if (this.inFlight === 0 && Date.now() - this.lastActivity >= quietMs) {
        return;
      }
      if (Date.now() - started >= capMs) {
        return;
      }
      await sleep(Math.min(20, quietMs || 20));
    }
  }

  async scrollByViewport(): Promise<void> {
    this.scrollStep += 1;
    for (let i = this.lazyQueue.length - 1; i >= 0; i--) {
      if (this.lazyQueue[i].step <= this.scrollStep) {
        const [lazy] = this.lazyQueue.splice(i, 1);
        void this.subfetch(lazy.url, "image");
      }
    }
  }

  async scrollToTop(): Promise<void> {
    // No network effect: already-loaded content stays loaded.
    this.scrollStep = 0;
  }

  landing(): LandingInfo | null {
    return this.landingInfo;
  }

  records(): NetworkRecord[] {
    return [...this.recordsList];
  }

  async close(): Promise<void> {
    this.closed = true;
    const deadline = Date.now() + 1000;
    while (this.inFlight > 0 && Date.now() < deadline) {
      await sleep(10);
    }
    this.aborter.abort();
  }

  forceClose(): void {
    this.closed = true;
    this.aborter.abort();
  }
}

export class HttpPageDriver implements PageDriver {
  async newContext(options: ContextOptions): Promise<PageContext> {
    return new HttpContext(options);
  }
}
