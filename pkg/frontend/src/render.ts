import type { ApiDetail, ApiMeta, WarningRow } from './types.js';
import { CLASS_ORDER } from './types.js';

export function escapeHtml(text: string): string {
  return text
    .replaceAll('&', '&amp;')
    .replaceAll('<', '&lt;')
    .replaceAll('>', '&gt;')
    .replaceAll('"', '&quot;');
}

function verdictBadge(row: WarningRow): string {
  if (row.verdict === null) return '';
  return `<span class="badge badge-${row.verdict}">${row.verdict}</span>`;
}

/** Ordered list markup; row order is exactly the order given. */
export function renderRows(rows: WarningRow[], focusId: string | null): string {
  if (rows.length === 0) {
    return '<p class="empty">No warnings to triage.</p>';
  }
  const items = rows.map((row) => {
    const focused = row.id === focusId ? ' focused' : '';
    return (
      `<li class="row band-${row.band}${focused}" data-id="${escapeHtml(row.id)}" tabindex="0">` +
      `<span class="rank">#${row.rank}</span>` +
      `<span class="score">${row.score.toFixed(3)}</span>` +
      `<span class="wtype">${escapeHtml(row.warningType)}</span>` +
      `<span class="loc">${escapeHtml(row.file)}:${row.line}</span>` +
      `<span class="proc">${escapeHtml(row.procedure)}</span>` +
      verdictBadge(row) +
      `</li>`
    );
  });
  return `<ol class="warning-list">${items.join('')}</ol>`;
}

function probabilityBars(probs: number[]): string {
  const bars = probs.map((p, i) => {
    const label = CLASS_ORDER[i] ?? `class ${i}`;
    const width = (p * 100).toFixed(1);
    return (
      `<div class="prob-row"><span class="prob-label">${label}</span>` +
      `<div class="prob-bar" style="width:${width}%"></div>` +
      `<span class="prob-value">${width}%</span></div>`
    );
  });
  return `<div class="probs">${bars.join('')}</div>`;
}

function excerptBlock(detail: ApiDetail): string {
  if (!detail.excerpt) {
    return '<p class="no-source">No source available; qualifier only.</p>';
  }
  const { start_line: start, warning_line: warningLine, lines } = detail.excerpt;
  const rendered = lines.map((text, i) => {
    const lineNo = start + i;
    const marked = lineNo === warningLine;
    const body = `<span class="lineno">${lineNo}</span>${escapeHtml(text)}`;
    return marked ? `<mark class="warning-line">${body}</mark>` : body;
  });
  return `<pre class="excerpt">${rendered.join('\n')}</pre>`;
}

export function renderDetail(detail: ApiDetail): string {
  return (
    `<div class="detail" data-id="${escapeHtml(detail.id)}">` +
    `<h2>#${detail.rank} ${escapeHtml(detail.warning_type)} ` +
    `<span class="band-chip band-${detail.band}">${detail.band}</span></h2>` +
    `<p class="qualifier">${escapeHtml(detail.qualifier)}</p>` +
    `<p class="meta">${escapeHtml(detail.file)}:${detail.line} in ` +
    `<code>${escapeHtml(detail.procedure)}</code>, score ${detail.score.toFixed(3)}, ` +
    `class ${escapeHtml(detail.predicted_class)}</p>` +
    excerptBlock(detail) +
    probabilityBars(detail.class_probs) +
    `</div>`
  );
}

export function renderError(message: string): string {
  return (
    `<div class="error-state"><p>Cannot reach the triage service: ` +
    `${escapeHtml(message)}</p>` +
    `<button type="button" data-action="retry">Retry</button></div>`
  );
}

export function renderMeta(meta: ApiMeta, shown: number): string {
  return (
    `<span>${shown} of ${meta.total} warnings</span>` +
    `<span class="band-chip band-red">${meta.bands.red} red</span>` +
    `<span class="band-chip band-orange">${meta.bands.orange} orange</span>` +
    `<span>${meta.judged} judged</span>`
  );
}
