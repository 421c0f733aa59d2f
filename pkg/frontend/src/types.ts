export type Band = 'red' | 'orange' | 'none';
export type Verdict = 'confirmed' | 'dismissed';

/** One row of GET /api/warnings, in server rank order. */
export interface ApiWarning {
  id: string;
  rank: number;
  warning_type: string;
  qualifier: string;
  file: string;
  line: number;
  procedure: string;
  predicted_class: string;
  score: number;
  band: Band;
  verdict: Verdict | null;
}

export interface ApiExcerpt {
  start_line: number;
  warning_line: number;
  lines: string[];
}

export interface ApiDetail extends ApiWarning {
  class_probs: number[];
  detector_prob: number;
  excerpt: ApiExcerpt | null;
  note?: string;
}

export interface ApiMeta {
  model_digest: string;
  report_digest: string;
  total: number;
  bands: Record<Band, number>;
  judged: number;
}

/** Display order of the reranker's classes, worst first. */
export const CLASS_ORDER = ['false_warning', 'UTB', 'LTB', 'VTB'] as const;

/** The list view model: what a row needs to render and be judged. */
export interface WarningRow {
  id: string;
  rank: number;
  warningType: string;
  file: string;
  line: number;
  procedure: string;
  qualifier: string;
  score: number;
  band: Band;
  verdict: Verdict | null;
}

export function toRow(w: ApiWarning): WarningRow {
  return {
    id: w.id,
    rank: w.rank,
    warningType: w.warning_type,
    file: w.file,
    line: w.line,
    procedure: w.procedure,
    qualifier: w.qualifier,
    score: w.score,
    band: w.band,
    verdict: w.verdict,
  };
}
