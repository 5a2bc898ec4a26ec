// Pure cockpit state: what the panels show and what the controls allow.
// Everything numeric is copied verbatim from server documents.

import type { ProcedureDoc, Trial } from "./types.js";

export type Scenario = "inefficiency" | "super-efficiency";

export interface SliderBounds {
  min: number;
  max: number;
  suggestion: number;
}

export interface CockpitState {
  hash: string | null;
  dmu: string | null;
  scenario: Scenario;
  phase: number;
  classification: string | null;
  directive: string | null;
  kappa1: number | null;
  kappa2: number | null;
  slider: number | null;
  override: boolean;
  trials: Trial[];
  finalKappa: number | null;
  complete: boolean;
}

export function initialState(): CockpitState {
  return {
    hash: null,
    dmu: null,
    scenario: "inefficiency",
    phase: 0,
    classification: null,
    directive: null,
    kappa1: null,
    kappa2: null,
    slider: null,
    override: false,
    trials: [],
    finalKappa: null,
    complete: false,
  };
}

/** Slider bounds are exactly the phase-3 interval; the suggested value is
 * its midpoint (a starting point for exploration, never auto-committed). */
export function sliderBounds(state: CockpitState): SliderBounds | null {
  if (state.kappa1 === null || state.kappa2 === null) return null;
  const min = Math.min(state.kappa1, state.kappa2);
  const max = Math.max(state.kappa1, state.kappa2);
  return { min, max, suggestion: 0.5 * (min + max) };
}

export function canRunPhase(state: CockpitState, phase: 1 | 2 | 3): boolean {
  if (state.dmu === null) return false;
  if (phase === 1) return true;
  if (state.directive !== null) return false;
  return state.phase >= phase - 1;
}

/** Trials must exist before a commit is allowed. */
export function canTry(state: CockpitState): boolean {
  return state.phase >= 3 && !state.complete;
}

export function canCommit(state: CockpitState): boolean {
  return state.trials.length > 0 && !state.complete;
}

export function withinBounds(state: CockpitState, kappa: number): boolean {
  const bounds = sliderBounds(state);
  if (bounds === null) return false;
  return kappa >= bounds.min - 1e-9 && kappa <= bounds.max + 1e-9;
}

/** Fold a fresh server document into the state.  The trial history is the
 * server's list verbatim, so a reload reproduces it exactly. */
export function applyProcedureDoc(state: CockpitState, doc: ProcedureDoc): CockpitState {
  const next: CockpitState = {
    ...state,
    hash: doc.dataset_hash,
    dmu: doc.dmu,
    scenario: doc.scenario as Scenario,
    phase: doc.phase,
    classification: doc.classification,
    directive: doc.directive,
    kappa1: doc.kappa1,
    kappa2: doc.kappa2,
    trials: doc.trials.slice(),
    finalKappa: doc.final_kappa,
    complete: doc.complete,
  };
  if (next.slider === null) {
    const bounds = sliderBounds(next);
    if (bounds !== null) next.slider = bounds.suggestion;
  }
  return next;
}

export function setSlider(state: CockpitState, value: number): CockpitState {
  return { ...state, slider: value };
}

export function setOverride(state: CockpitState, on: boolean): CockpitState {
  return { ...state, override: on };
}

export function selectUnit(state: CockpitState, dmu: string, scenario: Scenario): CockpitState {
  return { ...initialState(), hash: state.hash, dmu, scenario };
}

export function latestTrial(state: CockpitState): Trial | null {
  return state.trials.length ? state.trials[state.trials.length - 1] : null;
}

/** History panels never reorder or drop entries. */
export function historyIsAppendOnly(before: Trial[], after: Trial[]): boolean {
  if (after.length < before.length) return false;
  return before.every((t, i) => after[i].kappa === t.kappa);
}
