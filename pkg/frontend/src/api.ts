import type { ApiDetail, ApiMeta, ApiWarning, Verdict } from './types.js';

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function errorMessage(resp: Response): Promise<string> {
  try {
    const doc = await resp.json();
    if (doc && typeof doc.error === 'string') return doc.error;
  } catch {
    // fall through to the status line
  }
  return `${resp.status} ${resp.statusText}`;
}

/** Thin typed client over the triage service endpoints. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async get<T>(path: string): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path);
    if (!resp.ok) throw new ApiError(resp.status, await errorMessage(resp));
    return (await resp.json()) as T;
  }

  warnings(): Promise<{ warnings: ApiWarning[]; total: number }> {
    return this.get('/api/warnings');
  }

  detail(id: string): Promise<ApiDetail> {
    return this.get(`/api/warnings/${encodeURIComponent(id)}`);
  }

  meta(): Promise<ApiMeta> {
    return this.get('/api/meta');
  }

  async judge(id: string, verdict: Verdict, note = ''): Promise<void> {
    const resp = await this.fetchFn(
      `${this.baseUrl}/api/warnings/${encodeURIComponent(id)}/judgment`,
      {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify({ verdict, note }),
      },
    );
    if (!resp.ok) throw new ApiError(resp.status, await errorMessage(resp));
  }

  exportUrl(): string {
    return `${this.baseUrl}/api/export`;
  }
}
