import { ApiClient, ApiError } from './api.js';
import { TriageStore } from './state.js';
import { renderDetail, renderError, renderMeta, renderRows } from './render.js';
import type { Band, Verdict } from './types.js';
import { toRow } from './types.js';

const api = new ApiClient();
const store = new TriageStore();

const listEl = document.getElementById('list') as HTMLElement;
const detailEl = document.getElementById('detail') as HTMLElement;
const metaEl = document.getElementById('meta') as HTMLElement;
const statusEl = document.getElementById('status') as HTMLElement;

function status(text: string): void {
  statusEl.textContent = text;
}

function redrawList(): void {
  const rows = store.visible();
  listEl.innerHTML = renderRows(rows, store.focusId);
  void refreshMeta(rows.length);
}

async function refreshMeta(shown: number): Promise<void> {
  try {
    metaEl.innerHTML = renderMeta(await api.meta(), shown);
  } catch {
    metaEl.textContent = '';
  }
}

async function loadList(): Promise<void> {
  try {
    const doc = await api.warnings();
    store.setRows(doc.warnings.map(toRow));
    redrawList();
    status('ready: j/k move, enter inspects, c confirms, d dismisses, e exports');
  } catch (err) {
    listEl.innerHTML = renderError(err instanceof Error ? err.message : String(err));
  }
}

async function openDetail(id: string): Promise<void> {
  try {
    detailEl.innerHTML = renderDetail(await api.detail(id));
  } catch (err) {
    if (err instanceof ApiError && err.status === 404) {
      detailEl.innerHTML = '<p class="error-state">Warning not found on the server.</p>';
    } else {
      detailEl.innerHTML = renderError(err instanceof Error ? err.message : String(err));
    }
  }
}

async function judgeFocused(verdict: Verdict): Promise<void> {
  const id = store.focusId;
  if (!id) return;
  const rollback = store.applyVerdict(id, verdict);
  store.advanceFocus();
  redrawList();
  try {
    await api.judge(id, verdict);
    status(`${verdict}: ${id}`);
  } catch (err) {
    rollback();
    store.focusId = id;
    redrawList();
    status(`judgment rejected: ${err instanceof Error ? err.message : err}`);
  }
  if (store.focusId) void openDetail(store.focusId);
}

function bindFilters(): void {
  const band = document.getElementById('filter-band') as HTMLSelectElement;
  const verdict = document.getElementById('filter-verdict') as HTMLSelectElement;
  const hide = document.getElementById('hide-dismissed') as HTMLInputElement;
  band.addEventListener('change', () => {
    store.filters.band = band.value as Band | 'all';
    redrawList();
  });
  verdict.addEventListener('change', () => {
    store.filters.verdict = verdict.value as Verdict | 'unjudged' | 'all';
    redrawList();
  });
  hide.addEventListener('change', () => {
    store.filters.hideDismissed = hide.checked;
    redrawList();
  });
}

function bindKeyboard(): void {
  document.addEventListener('keydown', (event) => {
    if (event.target instanceof HTMLInputElement || event.target instanceof HTMLSelectElement) {
      return;
    }
    switch (event.key) {
      case 'j':
      case 'ArrowDown':
        store.moveFocus(1);
        redrawList();
        if (store.focusId) void openDetail(store.focusId);
        break;
      case 'k':
      case 'ArrowUp':
        store.moveFocus(-1);
        redrawList();
        if (store.focusId) void openDetail(store.focusId);
        break;
      case 'Enter':
      case 'o':
        if (store.focusId) void openDetail(store.focusId);
        break;
      case 'c':
        void judgeFocused('confirmed');
        break;
      case 'd':
        void judgeFocused('dismissed');
        break;
      case 'e':
        window.location.href = api.exportUrl();
        break;
      default:
        return;
    }
    event.preventDefault();
  });
}

function bindClicks(): void {
  listEl.addEventListener('click', (event) => {
    const row = (event.target as HTMLElement).closest('[data-id]');
    if (row instanceof HTMLElement && row.dataset.id) {
      store.focusId = row.dataset.id;
      redrawList();
      void openDetail(row.dataset.id);
    }
  });
  listEl.addEventListener('click', (event) => {
    const retry = (event.target as HTMLElement).closest('[data-action="retry"]');
    if (retry) void loadList();
  });
  (document.getElementById('export') as HTMLButtonElement).addEventListener('click', () => {
    window.location.href = api.exportUrl();
  });
}

bindFilters();
bindKeyboard();
bindClicks();
void loadList();
