/** View-model for the MyDB (personal database) browser. */

import type { MyDbSummary } from "./api.js";

export interface MyDbModel {
  owner: string;
  tables: string[];
  usageText: string;
  /** 0..100 for a usage meter. */
  usagePercent: number;
  nearQuota: boolean;
}

export function formatBytes(n: number): string {
  if (n >= 1 << 30) return `${(n / (1 << 30)).toFixed(1)} GiB`;
  if (n >= 1 << 20) return `${(n / (1 << 20)).toFixed(1)} MiB`;
  if (n >= 1 << 10) return `${(n / (1 << 10)).toFixed(1)} KiB`;
  return `${n} B`;
}

export function mydbModel(summary: MyDbSummary): MyDbModel {
  const pct =
    summary.quota_bytes > 0
      ? Math.min(100, (100 * summary.used_bytes) / summary.quota_bytes)
      : 0;
  return {
    owner: summary.owner,
    tables: [...summary.tables].sort(),
    usageText: `${formatBytes(summary.used_bytes)} of ${formatBytes(
      summary.quota_bytes,
    )} used`,
    usagePercent: pct,
    nearQuota: pct >= 90,
  };
}
