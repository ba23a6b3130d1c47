/**
 * Headers-only HAR 1.2 output.
 *
 * Builds an HTTP Archive document from the network records of one page
 * visit. Entries carry full request/response headers, status, sizes and
 * timing, but never response body text: content objects have a size and
 * mimeType only. That keeps captures small and free of page content
 * while still supporting header- and size-level analysis downstream.
 *
 * File naming: `<site>__<page>__run<k>.har`. Site ids and page labels
 * must not contain "__" (config validation enforces this), so the stem
 * always splits back into exactly three parts.
 */

import type { HeaderPair, NetworkRecord } from "./driver";

export const CREATOR_NAME = "capture-orchestrator";
export const CREATOR_VERSION = "0.1.0";

const STATUS_TEXT: Record<number, string> = {
  200: "OK",
  204: "No Content",
  301: "Moved Permanently",
  302: "Found",
  304: "Not Modified",
  400: "Bad Request",
  401: "Unauthorized",
  403: "Forbidden",
  404: "Not Found",
  429: "Too Many Requests",
  500: "Internal Server Error",
  503: "Service Unavailable",
};

export function harFileName(siteId: string, pageLabel: string, runIndex: number): string {
  return `${siteId}__${pageLabel}__run${runIndex}.har`;
}

/** True when a file name follows the `<site>__<page>__run<k>.har` convention. */
export function isCaptureFileName(name: string): boolean {
  return /^.+?__.+?__run\d+\.har$/.test(name);
}

export interface HarPageMeta {
  url: string;
  startedAt: Date;
  /** Time from navigation start to document-loaded; -1 when unknown. */
  onLoadMs?: number;
}

function headerObjects(headers: HeaderPair[]): Array<{ name: string; value: string }> {
  return headers.map((pair) => ({ name: pair.name, value: pair.value }));
}

function findHeader(headers: HeaderPair[], name: string): string {
  const wanted = name.toLowerCase();
  for (const pair of headers) {
    if (pair.name.toLowerCase() === wanted) {
      return pair.value;
    }
  }
  return "";
}

function entryFromRecord(record: NetworkRecord, pageId: string): object {
  const duration = Math.max(0, record.durationMs);
  return {
    pageref: pageId,
    startedDateTime: record.startedAt.toISOString(),
    time: duration,
    request: {
      method: record.method,
      url: record.url,
      httpVersion: "HTTP/1.1",
      cookies: [],
      headers: headerObjects(record.requestHeaders),
      queryString: [],
      headersSize: -1,
      bodySize: 0,
    },
    response: {
      status: record.status,
      statusText: STATUS_TEXT[record.status] ?? "",
      httpVersion: "HTTP/1.1",
      cookies: [],
      headers: headerObjects(record.responseHeaders),
      content: {
        size: record.contentSize,
        mimeType: record.mimeType,
        comment: "body not recorded",
      },
      redirectURL: findHeader(record.responseHeaders, "location"),
      headersSize: -1,
      bodySize: record.bodySize,
    },
    cache: {},
    timings: {
      blocked: -1,
      dns: -1,
      connect: -1,
      send: 0,
      wait: duration,
      receive: 0,
      ssl: -1,
    },
  };
}

/** Assemble a HAR 1.2 document from one visit's records. */
export function buildHar(records: NetworkRecord[], page: HarPageMeta): object {
  const pageId = "page_1";
  const ordered = [...records].sort(
    (a, b) => a.startedAt.getTime() - b.startedAt.getTime(),
  );
  return {
    log: {
      version: "1.2",
      creator: {
        name: CREATOR_NAME,
        version: CREATOR_VERSION,
        comment: "headers-only capture; response bodies are not recorded",
      },
      pages: [
        {
          startedDateTime: page.startedAt.toISOString(),
          id: pageId,
          title: page.url,
          pageTimings: {
            onContentLoad: -1,
            onLoad: page.onLoadMs ?? -1,
          },
        },
      ],
      entries: ordered.map((record) => entryFromRecord(record, pageId)),
    },
  };
}

/** Stable serialization: pretty-printed JSON with a trailing newline. */
export function serializeHar(har: object): string {
  return JSON.stringify(har, null, 2) + "\n";
}
