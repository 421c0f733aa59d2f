import type { Band, Verdict, WarningRow } from './types.js';

export interface Filters {
  band: Band | 'all';
  verdict: Verdict | 'unjudged' | 'all';
  hideDismissed: boolean;
}

export const DEFAULT_FILTERS: Filters = {
  band: 'all',
  verdict: 'all',
  hideDismissed: false,
};

/** Client-side list state.
 *
 * Rows stay exactly in server order; filters and focus are the only
 * client-owned state, and verdicts are optimistic copies of what the
 * server confirmed or will confirm.
 */
export class TriageStore {
  rows: WarningRow[] = [];
  filters: Filters = { ...DEFAULT_FILTERS };
  focusId: string | null = null;

  setRows(rows: WarningRow[]): void {
    this.rows = [...rows];
    if (this.focusId && !this.rows.some((r) => r.id === this.focusId)) {
      this.focusId = null;
    }
    if (this.focusId === null) {
      this.focusId = this.firstUnjudged()?.id ?? this.visible()[0]?.id ?? null;
    }
  }

  rowById(id: string): WarningRow | undefined {
    return this.rows.find((r) => r.id === id);
  }

  /** Filtered view; never reorders. */
  visible(): WarningRow[] {
    return this.rows.filter((r) => {
      if (this.filters.band !== 'all' && r.band !== this.filters.band) return false;
      if (this.filters.hideDismissed && r.verdict === 'dismissed') return false;
      if (this.filters.verdict === 'unjudged') return r.verdict === null;
      if (this.filters.verdict !== 'all' && r.verdict !== this.filters.verdict) return false;
      return true;
    });
  }

  firstUnjudged(): WarningRow | undefined {
    return this.visible().find((r) => r.verdict === null);
  }

  /** Optimistically set a verdict; returns a rollback restoring the old one. */
  applyVerdict(id: string, verdict: Verdict | null): () => void {
    const row = this.rowById(id);
    if (!row) return () => undefined;
    const previous = row.verdict;
    row.verdict = verdict;
    return () => {
      const target = this.rowById(id);
      if (target) target.verdict = previous;
    };
  }

  /** Move focus to the next unjudged visible row after the current focus;
   * used right after a judgment so the loop keeps flowing. */
  advanceFocus(): void {
    const rows = this.visible();
    if (rows.length === 0) {
      this.focusId = null;
      return;
    }
    const start = rows.findIndex((r) => r.id === this.focusId);
    for (let step = 1; step <= rows.length; step++) {
      const candidate = rows[(start + step) % rows.length];
      if (candidate && candidate.verdict === null) {
        this.focusId = candidate.id;
        return;
      }
    }
    // everything judged: keep focus where it is (or first row)
    this.focusId = rows[Math.max(start, 0)]?.id ?? rows[0]?.id ?? null;
  }

  /** Keyboard navigation: move focus by delta within the visible rows. */
  moveFocus(delta: number): void {
    const rows = this.visible();
    if (rows.length === 0) {
      this.focusId = null;
      return;
    }
    const index = rows.findIndex((r) => r.id === this.focusId);
    const next = index === -1 ? 0 : Math.min(Math.max(index + delta, 0), rows.length - 1);
    this.focusId = rows[next]?.id ?? null;
  }
}
