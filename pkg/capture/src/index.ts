/**
 * Public API of the capture orchestrator.
 *
 * Typical use: build a CaptureConfig (makeConfig or loadConfig), then
 * runBatch it. Captures are recorded as headers-only HAR 1.2 files named
 * `<site>__<page>__run<k>.har`, and the batch writes a
 * capture_manifest.json that downstream HAR analysis consumes directly.
 */

export {
  CONFIG_DEFAULTS,
  ConfigError,
  loadConfig,
  makeConfig,
  parseConfigDocument,
  type CaptureConfig,
  type ConfigSpec,
  type PageTarget,
  type SiteSpec,
  type SiteTarget,
} from "./config";
export {
  DriverFailure,
  type ContextOptions,
  type HeaderPair,
  type LandingInfo,
  type NetworkRecord,
  type PageContext,
  type PageDriver,
} from "./driver";
export {
  buildHar,
  CREATOR_NAME,
  CREATOR_VERSION,
  harFileName,
  isCaptureFileName,
  serializeHar,
  type HarPageMeta,
} from "./har";
export { HttpPageDriver } from "./httpDriver";
export {
  BLOCKING_STATUSES,
  BOT_CHALLENGE_KEYWORDS,
  capturePage,
  detectBlock,
  runBatch,
  type BatchResult,
  type CaptureOutcome,
  type CapturePageOptions,
  type CaptureRow,
  type OutcomeKind,
  type RunBatchOptions,
  type SiteResult,
} from "./orchestrator";
