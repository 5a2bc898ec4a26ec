// Shapes of the documents served by the HTTP API.

export interface EfficiencyReport {
  dmu: string;
  model: string;
  kappa: number | null;
  tau: number;
  efficiency: number;
  inefficiency: number;
  rtvs: number;
  adjustment_price: number;
  virtual_gap: number;
  gamma: number;
  omega: number;
  alpha: number;
  beta: number;
  benchmark_alpha: number;
  benchmark_beta: number;
  anchor: [number, number];
  benchmark_inputs: number[];
  benchmark_outputs: number[];
  input_ratios: number[];
  output_ratios: number[];
  intensities: number[];
  input_prices: number[];
  output_prices: number[];
  scalar_price: number | null;
  reference: string[];
  intensity_total: number;
}

export interface Trial {
  kappa: number;
  report: EfficiencyReport;
}

export interface EndpointRecord {
  kappa: number | null;
  side: "decrease" | "increase";
  status: string;
  report: EfficiencyReport | null;
}

export interface ProcedureDoc {
  schema_version: number;
  dataset_hash: string;
  dmu: string;
  scenario: string;
  phase: number;
  classification: string | null;
  directive: string | null;
  kappa1: number | null;
  kappa2: number | null;
  phase3_endpoints: EndpointRecord[];
  trials: Trial[];
  final_kappa: number | null;
  final_benchmarks: { inputs: number[]; outputs: number[] } | null;
  complete: boolean;
}

export interface PlotPoint {
  label: string;
  alpha: number;
  beta: number;
  is_reference: boolean;
  is_focus: boolean;
  quadrant: string;
}

export interface PlotVector {
  tail: [number, number];
  head: [number, number];
  dx: number;
  dy: number;
  slope: number | null;
}

export interface PlotGeometry {
  dmu: string;
  model: string;
  kappa: number | null;
  points: PlotPoint[];
  focus: { alpha: number; beta: number; quadrant: string };
  anchor: { x: number; y: number; quadrant: string };
  projection: { alpha: number; beta: number };
  equator: { slope: number; intercept: number };
  vectors: {
    origin_to_focus: PlotVector;
    origin_to_anchor: PlotVector;
    anchor_to_focus: PlotVector;
  };
}

export interface DatasetDoc {
  dmus: string[];
  inputs: { label: string; unit: string }[];
  outputs: { label: string; unit: string }[];
  X: number[][];
  Y: number[][];
}

export interface RankRow {
  dmu: string;
  class: string;
  score: number;
  criterion: string;
  criterion_ratio: number;
}
