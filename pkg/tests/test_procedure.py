import json

import numpy as np
import pytest

from virtualgap import analysis as A, dataset, models as M, procedure as P
from conftest import assert_close, endpoint_solution, random_matrix

GOLD = 2e-3


class TestPhase1:
    def test_inefficient_unit(self, proc_k):
        assert proc_k.classification == "inefficient"
        assert_close(proc_k.kappa1, 1.5153, GOLD, "first scalar")

    def test_efficient_unit_stops_with_directive(self, example6):
        state = P.phase1(example6, "B")
        assert state.classification == "efficient"
        assert state.kappa1 is None
        assert "super-efficiency" in state.directive
        with pytest.raises(P.PhaseOrderError):
            P.phase2(state, example6)

    def test_super_scenario(self, proc_b):
        assert_close(proc_b.kappa1, 0.2417, GOLD, "first scalar B")

    def test_super_on_inefficient_fails(self, example6):
        with pytest.raises(M.NotEfficientError):
            P.phase1(example6, "K", P.SUPER)

    def test_unknown_scenario(self, example6):
        with pytest.raises(P.ProcedureError):
            P.phase1(example6, "K", "sideways")


class TestPhase2:
    def test_step1_link(self, proc_k):
        checks = proc_k.phase2_checks
        assert checks["step1_prices_linked"]
        assert_close(checks["step1_adjustment_price_plain"], 2.3010, GOLD, "plain step-I")
        assert_close(checks["step1_adjustment_price_scalar"], 2.3010, GOLD, "scalar step-I")

    def test_step2_divergence(self, proc_k):
        checks = proc_k.phase2_checks
        assert_close(checks["step2_efficiency_plain"], 0.589, GOLD, "plain E")
        assert_close(checks["step2_efficiency_scalar"], 0.411, GOLD, "scalar E")
        assert checks["step2_tau_plain"] != checks["step2_tau_scalar"]

    def test_super_link(self, proc_b):
        # B's scalar run keeps the plain super-efficiency at the first scalar
        assert_close(proc_b.phase2_solution.efficiency, 2.4126, GOLD, "sTS1 E")
        assert_close(proc_b.phase2_solution.step2.scalar_price, 0.3538, GOLD, "w")


class TestPhase3:
    def test_second_scalars(self, proc_k, proc_b, proc_d):
        assert_close(proc_k.kappa2, 0.515, GOLD, "K second scalar")
        assert_close(proc_b.kappa2, 0.4273, GOLD, "B second scalar")
        assert_close(proc_d.kappa2, 1.4774, GOLD, "D second scalar")

    def test_endpoint_records(self, proc_k):
        sides = {e.side: e.status for e in proc_k.phase3_endpoints}
        assert sides["decrease"] == "ok"
        assert sides["increase"] == "degenerate"
        assert proc_k.phase3_range["allowable_decrease"] == pytest.approx(
            proc_k.kappa1 - proc_k.kappa2, abs=1e-9)

    def test_endpoint_efficiencies(self, proc_k, proc_b, proc_d):
        assert_close(endpoint_solution(proc_k).efficiency, 0.668, GOLD, "TS2 K")
        assert_close(endpoint_solution(proc_b).efficiency, 2.4868, GOLD, "sTS2 B (reconstructed)")
        assert_close(endpoint_solution(proc_d).efficiency, 1.3609, GOLD, "sTS2 D")

    def test_endpoint_resolves_optimal(self, example6, proc_k):
        # re-solving the adjustment-price program at the second scalar keeps
        # an optimal status and matches the recorded objective
        import virtualgap.linprog as lpg
        prog = M.build_program(example6, "tsc", "K", 1.0, "tap", kappa=proc_k.kappa2)
        sol = lpg.solve(prog)
        assert sol.status == lpg.OPTIMAL
        assert sol.objective == pytest.approx(
            endpoint_solution(proc_k).step1.adjustment_price, abs=1e-8)

    def test_one_sided_interval(self):
        # identical columns: the scalar can move in one direction only or not
        # at all; the procedure must still settle on a second scalar
        m = dataset.DecisionMatrix(
            ("a", "b", "c", "d"), (("x", ""),), (("y", ""),),
            [[1.0, 1.0, 2.0, 3.0]], [[1.0, 1.0, 1.5, 1.2]])
        state = P.run_phases(m, "d")
        assert state.kappa2 is not None
        lo, hi = state.interval()
        assert lo <= state.kappa1 <= hi


class TestPhase4:
    def test_try_matches_plain_score(self, example6, proc_k):
        rep = P.phase4_try(proc_k, example6, 0.718)
        assert_close(rep.efficiency, 0.589, GOLD, "tried scalar score")

    def test_try_at_first_scalar_reproduces_phase2(self, example6, proc_k):
        rep = P.phase4_try(proc_k, example6, proc_k.kappa1)
        expect = A.report(example6, proc_k.phase2_solution)
        assert rep.to_json_dict() == expect.to_json_dict()

    def test_try_super_midpoint(self, example6, proc_b):
        kappa = 0.5 * (proc_b.kappa1 + proc_b.kappa2)
        rep = P.phase4_try(proc_b, example6, kappa)
        assert_close(rep.efficiency, 2.4779, GOLD, "midpoint score")

    def test_out_of_interval(self, example6, proc_k):
        with pytest.raises(P.OutOfIntervalError):
            P.phase4_try(proc_k, example6, 0.51)
        rep = P.phase4_try(proc_k, example6, 0.51, override=True)
        assert rep.kappa == pytest.approx(0.51)

    def test_infeasible_override_propagates(self, example6, proc_k):
        with pytest.raises(M.ModelInfeasibleError):
            P.phase4_try(proc_k, example6, 5.0, override=True)

    def test_commit_flow(self, example6):
        state = P.run_phases(example6, "K")
        P.phase4_try(state, example6, 0.718)
        before = [t["kappa"] for t in state.trials]
        P.phase4_commit(state, 0.718)
        assert state.complete and state.final_kappa == pytest.approx(0.718)
        bench = state.final_benchmarks
        assert_close(bench["inputs"][0], 1.019, GOLD, "x1 benchmark")
        assert_close(bench["inputs"][1], 105.165, 1e-2, "x2 benchmark")
        assert_close(bench["outputs"][0], 1036.0, 1e-6, "y1 benchmark")
        assert_close(bench["outputs"][1], 66.58, 1e-2, "y2 benchmark")
        assert [t["kappa"] for t in state.trials] == before

    def test_commit_at_first_scalar_freezes_phase2_benchmarks(self, example6):
        state = P.run_phases(example6, "K")
        P.phase4_try(state, example6, state.kappa1)
        P.phase4_commit(state, state.kappa1)
        expect = A.report(example6, state.phase2_solution)
        assert state.final_benchmarks["inputs"] == pytest.approx(expect.benchmark_inputs)

    def test_commit_untried(self, example6):
        state = P.run_phases(example6, "K")
        with pytest.raises(P.UntriedScalarError):
            P.phase4_commit(state, 0.9)

    def test_trials_preserve_order(self, example6):
        state = P.run_phases(example6, "K")
        for kappa in (1.0, 0.718, 1.2):
            P.phase4_try(state, example6, kappa)
        assert [t["kappa"] for t in state.trials] == [1.0, 0.718, 1.2]


class TestSession:
    def test_round_trip(self, example6):
        state = P.run_phases(example6, "K")
        P.phase4_try(state, example6, 0.718)
        doc = state.to_json()
        again = P.ProcedureState.from_json(doc)
        assert again.kappa1 == state.kappa1
        assert again.kappa2 == state.kappa2
        assert again.trials == state.trials
        assert again.phase == state.phase
        # a reloaded session can continue phase 4
        P.phase4_commit(again, 0.718)
        assert again.complete

    def test_schema_version_checked(self):
        with pytest.raises(P.ProcedureError):
            P.ProcedureState.from_json(json.dumps({"schema_version": 99}))


class TestRank:
    def test_example_ordering(self, example6):
        table = P.rank(example6)
        rows = table.rows
        assert [r.dmu for r in rows[:2]] == ["B", "D"]
        assert rows[0].classification == "efficient"
        assert_close(rows[0].score, 2.4126, GOLD, "B super score")
        assert_close(rows[1].score, 1.3533, GOLD, "D super score")
        ineff = {r.dmu: r for r in rows[2:]}
        assert set(ineff) == {"K", "A", "G", "H"}
        assert_close(ineff["K"].score, 0.589, GOLD, "K score")
        scores = [r.score for r in rows[2:]]
        assert scores == sorted(scores, reverse=True)

    def test_weakest_criterion_annotation(self, example6):
        table = P.rank(example6)
        k_row = next(r for r in table.rows if r.dmu == "K")
        assert k_row.criterion == "out:y2"          # largest adjustment ratio 1.7677
        assert_close(k_row.criterion_ratio, 1.7677, GOLD, "K ratio")
        b_row = next(r for r in table.rows if r.dmu == "B")
        assert b_row.criterion == "out:y2"          # largest allowance ratio 0.7366

    def test_scalars_override(self, example6, proc_b):
        kappa = 0.5 * (proc_b.kappa1 + proc_b.kappa2)
        table = P.rank(example6, scalars={"B": kappa})
        b_row = next(r for r in table.rows if r.dmu == "B")
        assert_close(b_row.score, 2.4779, GOLD, "B at committed scalar")

    def test_clone_dataset_lexicographic(self):
        m = dataset.DecisionMatrix(
            ("z", "a", "q"), (("x", ""),), (("y", ""),),
            [[2.0, 2.0, 2.0]], [[5.0, 5.0, 5.0]])
        table = P.rank(m)
        assert [r.dmu for r in table.rows] == ["a", "q", "z"]
        for row in table.rows:
            assert row.classification == "efficient"
            assert row.score == pytest.approx(1.0, abs=1e-9)

    def test_rank_is_stable_under_permutation(self, example6):
        perm = ["D", "H", "K", "B", "A", "G"]
        idx = [example6.index_of(d) for d in perm]
        shuffled = dataset.DecisionMatrix(
            tuple(perm), example6.inputs, example6.outputs,
            example6.X[:, idx], example6.Y[:, idx])
        a = {r.dmu: r.score for r in P.rank(example6).rows}
        b = {r.dmu: r.score for r in P.rank(shuffled).rows}
        for dmu in a:
            assert a[dmu] == pytest.approx(b[dmu], abs=1e-9)


class TestIrrelevance:
    def test_dropping_never_referenced_unit(self, example6):
        # find units never referenced by any plain run
        referenced = set()
        for dmu in example6.dmus:
            referenced |= set(M.evaluate(example6, "pt", dmu).step2.reference)
        removable = [d for d in example6.dmus if d not in referenced]
        assert removable, "expected an unreferenced unit in the example set"
        victim = removable[0]
        reduced = example6.drop(victim)
        for dmu in reduced.dmus:
            before = M.evaluate(example6, "pt", dmu)
            after = M.evaluate(reduced, "pt", dmu)
            assert abs(before.efficiency - after.efficiency) <= 1e-9
            if before.step2.adjustment_price > M.EFFICIENT_TOL:
                k1 = M.first_scalar(before)
                ts_before = M.evaluate(example6, "tsc", dmu, kappa=k1)
                ts_after = M.evaluate(reduced, "tsc", dmu, kappa=k1)
                assert abs(ts_before.efficiency - ts_after.efficiency) <= 1e-9


class TestFindMatchingScalar:
    def test_published_target(self, example6):
        kappa = P.find_matching_scalar(example6, "K", 0.589)
        assert 0.714 <= kappa <= 0.722

    def test_endpoint_target(self, example6, proc_k):
        target = proc_k.phase2_solution.efficiency
        kappa = P.find_matching_scalar(example6, "K", target)
        assert kappa == pytest.approx(proc_k.kappa1, abs=1e-9)

    def test_not_bracketed(self, example6):
        with pytest.raises(P.NotBracketedError):
            P.find_matching_scalar(example6, "K", 0.99)

    def test_efficient_unit_has_no_interval(self, example6):
        with pytest.raises(P.ProcedureError):
            P.find_matching_scalar(example6, "B", 1.0)


class TestRandomProcedure:
    def test_random_walks_complete(self):
        rng = np.random.default_rng(17)
        done = 0
        for _ in range(8):
            matrix = random_matrix(rng, n=6, m=2, s=2)
            for dmu in matrix.dmus:
                probe = M.evaluate(matrix, "pt", dmu, verify_step2=False)
                if probe.step2.adjustment_price > M.EFFICIENT_TOL:
                    state = P.run_phases(matrix, dmu)
                    lo, hi = state.interval()
                    mid = 0.5 * (lo + hi)
                    rep = P.phase4_try(state, matrix, mid)
                    P.phase4_commit(state, mid)
                    assert state.complete
                    assert -1e-9 <= rep.efficiency <= 1 + 1e-9
                    done += 1
                    break
        assert done >= 5
