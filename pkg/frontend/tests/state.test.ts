import { describe, expect, it } from "vitest";

import {
  applyProcedureDoc,
  canCommit,
  canRunPhase,
  canTry,
  historyIsAppendOnly,
  initialState,
  latestTrial,
  selectUnit,
  setSlider,
  sliderBounds,
  withinBounds,
} from "../src/state.js";
import type { ProcedureDoc, Trial } from "../src/types.js";

function doc(partial: Partial<ProcedureDoc>): ProcedureDoc {
  return {
    schema_version: 1,
    dataset_hash: "abc",
    dmu: "K",
    scenario: "inefficiency",
    phase: 0,
    classification: null,
    directive: null,
    kappa1: null,
    kappa2: null,
    phase3_endpoints: [],
    trials: [],
    final_kappa: null,
    final_benchmarks: null,
    complete: false,
    ...partial,
  };
}

const trial = (kappa: number): Trial => ({ kappa, report: { efficiency: 0.5 } as never });

describe("cockpit state", () => {
  it("starts with everything locked except phase 1", () => {
    let state = initialState();
    expect(canRunPhase(state, 1)).toBe(false); // no unit selected yet
    state = selectUnit(state, "K", "inefficiency");
    expect(canRunPhase(state, 1)).toBe(true);
    expect(canRunPhase(state, 2)).toBe(false);
    expect(canTry(state)).toBe(false);
    expect(canCommit(state)).toBe(false);
  });

  it("slider bounds are the phase-3 interval with a midpoint suggestion", () => {
    let state = selectUnit(initialState(), "K", "inefficiency");
    state = applyProcedureDoc(state, doc({ phase: 3, kappa1: 1.5153, kappa2: 0.515 }));
    const bounds = sliderBounds(state)!;
    expect(bounds.min).toBeCloseTo(0.515, 6);
    expect(bounds.max).toBeCloseTo(1.5153, 6);
    expect(bounds.suggestion).toBeCloseTo(0.5 * (0.515 + 1.5153), 9);
    expect(state.slider).toBeCloseTo(bounds.suggestion, 9);
    expect(withinBounds(state, 0.718)).toBe(true);
    expect(withinBounds(state, 0.4)).toBe(false);
    expect(withinBounds(state, 2.0)).toBe(false);
  });

  it("an efficient unit in the inefficiency scenario stops at phase 1", () => {
    let state = selectUnit(initialState(), "B", "inefficiency");
    state = applyProcedureDoc(
      state,
      doc({ dmu: "B", phase: 1, classification: "efficient", directive: "use the super-efficiency scenario" }),
    );
    expect(canRunPhase(state, 2)).toBe(false);
    expect(state.directive).toContain("super-efficiency");
  });

  it("commit unlocks only after at least one trial", () => {
    let state = selectUnit(initialState(), "K", "inefficiency");
    state = applyProcedureDoc(state, doc({ phase: 3, kappa1: 1.5, kappa2: 0.5 }));
    expect(canTry(state)).toBe(true);
    expect(canCommit(state)).toBe(false);
    state = applyProcedureDoc(state, doc({ phase: 3, kappa1: 1.5, kappa2: 0.5, trials: [trial(0.7)] }));
    expect(canCommit(state)).toBe(true);
    expect(latestTrial(state)!.kappa).toBe(0.7);
  });

  it("the server trial list is mirrored verbatim and append-only", () => {
    let state = selectUnit(initialState(), "K", "inefficiency");
    const before = [trial(1.0), trial(0.7)];
    state = applyProcedureDoc(state, doc({ phase: 3, kappa1: 1.5, kappa2: 0.5, trials: before }));
    const after = [...before, trial(0.9)];
    expect(historyIsAppendOnly(state.trials, after)).toBe(true);
    expect(historyIsAppendOnly(after, before)).toBe(false);
    expect(historyIsAppendOnly(before, [trial(0.7), trial(1.0), trial(0.9)])).toBe(false);
  });

  it("slider moves do not touch the history", () => {
    let state = selectUnit(initialState(), "K", "inefficiency");
    state = applyProcedureDoc(state, doc({ phase: 3, kappa1: 1.5, kappa2: 0.5, trials: [trial(1.0)] }));
    const history = state.trials;
    state = setSlider(state, 0.8);
    expect(state.slider).toBe(0.8);
    expect(state.trials).toEqual(history);
  });

  it("completion locks the controls", () => {
    let state = selectUnit(initialState(), "K", "inefficiency");
    state = applyProcedureDoc(state, doc({
      phase: 4, kappa1: 1.5, kappa2: 0.5, trials: [trial(0.718)],
      final_kappa: 0.718, complete: true,
    }));
    expect(canTry(state)).toBe(false);
    expect(canCommit(state)).toBe(false);
    expect(state.finalKappa).toBe(0.718);
  });
});
