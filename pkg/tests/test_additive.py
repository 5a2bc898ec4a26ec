import numpy as np
import pytest

from virtualgap import additive, dataset, linprog as lpg, models as M


class TestEvaluateAdditive:
    def test_efficient_unit_has_zero_slacks(self, example6):
        sol = additive.evaluate_additive(example6, "B")
        assert sol.envelopment_status == lpg.OPTIMAL
        assert sol.inefficiency == pytest.approx(0.0, abs=1e-8)
        assert np.allclose(sol.input_slacks, 0.0, atol=1e-8)
        assert np.allclose(sol.output_slacks, 0.0, atol=1e-8)
        assert sol.efficient

    def test_inefficient_unit_positive_score(self, example6):
        sol = additive.evaluate_additive(example6, "K")
        assert sol.inefficiency > 0
        assert not sol.efficient

    def test_envelopment_against_vertex_oracle(self, example6):
        # brute-force the envelopment program's basic feasible solutions
        prog = additive.envelopment_program(example6, "K", additive.AdditiveConfig())
        best = max(obj for _, obj in lpg.enumerate_vertices(prog))
        sol = additive.evaluate_additive(example6, "K")
        assert sol.inefficiency == pytest.approx(best, abs=1e-9)

    def test_identical_units(self):
        m = dataset.DecisionMatrix(
            ("a", "b", "c"), (("x", ""),), (("y", ""),),
            [[2.0, 2.0, 2.0]], [[3.0, 3.0, 3.0]])
        sol = additive.evaluate_additive(m, "a")
        assert sol.inefficiency == pytest.approx(0.0, abs=1e-9)
        assert sol.intensities[0] == pytest.approx(1.0, abs=1e-9)

    def test_duality_crs(self, example6):
        for dmu in example6.dmus:
            sol = additive.evaluate_additive(example6, dmu)
            if sol.envelopment_status == lpg.OPTIMAL and sol.multiplier_status == lpg.OPTIMAL:
                assert abs(sol.inefficiency - sol.multiplier_inefficiency) <= 1e-7

    def test_duality_vrs_when_both_solve(self, example6):
        cfg = additive.AdditiveConfig(returns_to_scale="vrs")
        for dmu in example6.dmus:
            sol = additive.evaluate_additive(example6, dmu, cfg)
            assert sol.envelopment_status == lpg.OPTIMAL
            if sol.multiplier_status == lpg.OPTIMAL:
                assert abs(sol.inefficiency - sol.multiplier_inefficiency) <= 1e-7

    def test_complementary_slackness(self, example6):
        cfg = additive.AdditiveConfig()
        prog = additive.envelopment_program(example6, "K", cfg)
        sol = lpg.solve(prog)
        row_res, var_res = lpg.complementary_slackness_residuals(prog, sol)
        assert np.all(row_res <= 1e-7)
        assert np.all(var_res <= 1e-7)

    def test_weights_validation(self, example6):
        with pytest.raises(additive.AdditiveError):
            additive.evaluate_additive(
                example6, "K", additive.AdditiveConfig(input_weights=(1.0,)))
        with pytest.raises(additive.AdditiveError):
            additive.evaluate_additive(
                example6, "K", additive.AdditiveConfig(input_weights=(1.0, -1.0)))
        with pytest.raises(additive.AdditiveError):
            additive.evaluate_additive(
                example6, "K", additive.AdditiveConfig(returns_to_scale="drs"))

    def test_custom_weights_scale_objective(self, example6):
        base = additive.evaluate_additive(example6, "K")
        heavy = additive.evaluate_additive(
            example6, "K",
            additive.AdditiveConfig(input_weights=(2.0, 2.0), output_weights=(2.0, 2.0)))
        assert heavy.inefficiency == pytest.approx(2.0 * base.inefficiency, rel=1e-9)


class TestClassification:
    def test_crs_classifies_like_virtual_gap(self, example6):
        efficient = set()
        for dmu in example6.dmus:
            if additive.evaluate_additive(example6, dmu).efficient:
                efficient.add(dmu)
        assert efficient == {"B", "D"}


class TestCompare:
    def test_record_flags(self, example6):
        record = additive.compare(example6, "K")
        assert record["flags"]["vga_score_in_unit_interval"]
        assert record["flags"]["vga_virtual_input_is_one"]
        assert record["flags"]["agree_on_efficiency"]
        assert record["flags"]["dea_virtual_input"] is not None
        assert isinstance(record["flags"]["dea_virtual_input_is_one"], bool)

    def test_efficient_agreement(self, example6):
        record = additive.compare(example6, "B")
        assert record["flags"]["agree_on_efficiency"]
        assert record["dea"]["efficient"]
        assert record["vga"]["plain_efficiency"] == pytest.approx(1.0, abs=1e-9)

    def test_scalar_at_one_reported_with_vrs(self, example6):
        record = additive.compare(example6, "K", additive.AdditiveConfig(returns_to_scale="vrs"))
        assert record["dea"]["envelopment_status"] == lpg.OPTIMAL
        assert record["vga"]["scalar_at_one_efficiency"] is not None
        assert 0.0 <= record["vga"]["scalar_at_one_efficiency"] <= 1.0

    def test_scalar_at_one_bounded_for_all_units(self, example6):
        # the scalar family at value one is well-posed on the whole example
        for dmu in example6.dmus:
            sol = M.evaluate(example6, "tsc", dmu, kappa=1.0)
            assert -1e-9 <= sol.efficiency <= 1 + 1e-9

    def test_reference_overlap(self, example6):
        record = additive.compare(example6, "K")
        assert record["flags"]["reference_overlap"] is not None
        assert 0.0 <= record["flags"]["reference_overlap"] <= 1.0
