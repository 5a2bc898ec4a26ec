import numpy as np
import pytest

from virtualgap import analysis as A, models as M
from conftest import assert_close, endpoint_solution

GOLD = 2e-3


@pytest.fixture(scope="module")
def report_runs(example6, proc_k, proc_b, proc_d):
    sols = [
        M.evaluate(example6, "pt", "K"),
        M.evaluate(example6, "pt", "B"),
        proc_k.phase2_solution,
        endpoint_solution(proc_k),
        M.evaluate(example6, "tsc", "K", kappa=0.718),
        M.evaluate(example6, "spt", "B", check_efficient=False),
        proc_b.phase2_solution,
        endpoint_solution(proc_b),
        proc_d.phase2_solution,
        endpoint_solution(proc_d),
    ]
    return [(sol, A.report(example6, sol)) for sol in sols]


class TestReport:
    def test_plain_K(self, example6):
        rep = A.report(example6, M.evaluate(example6, "pt", "K"))
        assert_close(rep.efficiency, 0.589, GOLD, "E")
        assert_close(rep.rtvs, 1.699, GOLD, "RTvS")
        assert_close(rep.benchmark_inputs[1], 67.66, 1e-2, "x2 benchmark")
        assert_close(rep.benchmark_outputs[1], 135.6, 5e-2, "y2 benchmark")
        assert rep.anchor == (0.0, 0.0)

    def test_scalar_second_endpoint_K(self, example6, proc_k):
        rep = A.report(example6, endpoint_solution(proc_k))
        assert_close(rep.efficiency, 0.668, GOLD, "E")
        assert_close(rep.rtvs, 1.497, GOLD, "RTvS")
        assert_close(rep.benchmark_inputs[0], 0.8713, GOLD, "x1 benchmark")

    def test_super_scalar_midpoint_B(self, example6, proc_b):
        kappa = 0.5 * (proc_b.kappa1 + proc_b.kappa2)
        sol = M.evaluate(example6, "stsc", "B", kappa=kappa, check_efficient=False)
        rep = A.report(example6, sol)
        assert_close(rep.efficiency, 2.4779, GOLD, "E")
        assert_close(rep.benchmark_outputs[0], 443.8, 1e-1, "y1 benchmark")
        assert_close(rep.anchor[0], -0.0787, GOLD, "anchor x")
        assert_close(rep.anchor[1], 0.0354, GOLD, "anchor y")


class TestVirtualScales:
    def test_scalar_family_peers(self, example6, proc_k):
        scales = A.virtual_technology_set(example6, proc_k.phase2_solution)
        b = example6.index_of("B")
        g = example6.index_of("G")
        assert_close(scales.alpha[b], 0.533, GOLD, "alpha_B")
        assert_close(scales.beta[b], 0.533, GOLD, "beta_B")
        assert_close(scales.alpha[g], 1.052, GOLD, "alpha_G")
        assert_close(scales.beta[g], 0.723, GOLD, "beta_G")

    def test_plain_focus_point(self, example6):
        sol = M.evaluate(example6, "pt", "K")
        scales = A.virtual_technology_set(example6, sol)
        k = example6.index_of("K")
        assert_close(scales.alpha[k], 1.000, 1e-9, "alpha_K")
        assert_close(scales.beta[k], 0.589, GOLD, "beta_K")

    def test_reference_peers_on_equator(self, example6, report_runs):
        for sol, rep in report_runs:
            scales = A.virtual_technology_set(example6, sol)
            for label in rep.reference:
                j = example6.index_of(label)
                assert abs(scales.alpha[j] - scales.beta[j]) <= 1e-7

    def test_gap_signs(self, example6, report_runs):
        for sol, _ in report_runs:
            scales = A.virtual_technology_set(example6, sol)
            j_o = example6.index_of(sol.dmu)
            for j in range(example6.num_dmus):
                if sol.kind.is_super and j == j_o:
                    continue
                diff = scales.alpha[j] - scales.beta[j]
                assert diff >= -1e-7


class TestReportInvariants:
    def test_score_rtvs_product(self, report_runs):
        for _, rep in report_runs:
            assert abs(rep.efficiency * rep.rtvs - 1.0) <= 1e-9

    def test_focus_slope_is_efficiency(self, report_runs):
        for _, rep in report_runs:
            assert abs(rep.beta / rep.alpha - rep.efficiency) <= 1e-9

    def test_benchmark_on_equator(self, report_runs):
        for _, rep in report_runs:
            assert abs(rep.benchmark_alpha - rep.benchmark_beta) <= 1e-7

    def test_rectilinear_distance_identity(self, report_runs):
        for sol, rep in report_runs:
            if sol.kind.is_super:
                total = (rep.benchmark_alpha - rep.alpha) + (rep.beta - rep.benchmark_beta)
            else:
                total = (rep.alpha - rep.benchmark_alpha) + (rep.benchmark_beta - rep.beta)
            assert abs(total - rep.adjustment_price) <= 1e-7

    def test_share_sums(self, report_runs):
        for _, rep in report_runs:
            assert abs(sum(rep.input_shares) - (1.0 - rep.gamma)) <= 1e-9
            assert abs(sum(rep.output_shares) - rep.gamma) <= 1e-9

    def test_gap_reconstruction_from_shares(self, example6, report_runs):
        # affected per-criterion prices must rebuild the total virtual gap
        for sol, rep in report_runs:
            j_o = example6.index_of(sol.dmu)
            x_o, y_o = example6.X[:, j_o], example6.Y[:, j_o]
            vx = np.asarray(rep.input_prices) * x_o
            uy = np.asarray(rep.output_prices) * y_o
            qs = np.asarray(rep.input_shares) * rep.omega
            ps = np.asarray(rep.output_shares) * rep.omega
            if sol.kind.is_super:
                total = -np.sum(vx - qs) + np.sum(uy + ps)
            else:
                total = np.sum(vx + qs) - np.sum(uy - ps)
            assert abs(total - rep.virtual_gap) <= 1e-7


class TestReevaluation:
    def test_plain(self, example6):
        sol = M.evaluate(example6, "pt", "K")
        rep = A.reevaluate_at_benchmark(example6, sol)
        assert abs(rep.efficiency - 1.0) <= 5e-6
        assert rep.adjustment_price <= 5e-6

    def test_scalar(self, example6):
        sol = M.evaluate(example6, "tsc", "K", kappa=0.718)
        rep = A.reevaluate_at_benchmark(example6, sol)
        assert abs(rep.efficiency - 1.0) <= 5e-6

    def test_super(self, example6):
        sol = M.evaluate(example6, "spt", "B")
        rep = A.reevaluate_at_benchmark(example6, sol)
        assert abs(rep.efficiency - 1.0) <= 5e-6

    def test_super_scalar(self, example6, proc_b):
        rep = A.reevaluate_at_benchmark(example6, endpoint_solution(proc_b))
        assert abs(rep.efficiency - 1.0) <= 5e-6

    def test_nonpositive_guard(self, example6):
        import dataclasses
        sol = M.evaluate(example6, "spt", "B")
        broken = dataclasses.replace(
            sol, step2=dataclasses.replace(
                sol.step2, output_ratios=np.array([1.0, 0.5])))
        with pytest.raises(A.BenchmarkNotPositiveError):
            A.reevaluate_at_benchmark(example6, broken)


class TestPlotGeometry:
    def test_scalar_anchor_K(self, example6, proc_k):
        geo = A.plot_geometry(example6, proc_k.phase2_solution)
        assert_close(geo.anchor["x"], 0.488, GOLD, "anchor x")
        assert_close(geo.anchor["y"], -0.147, GOLD, "anchor y")
        assert geo.anchor["quadrant"] == "IV"

    def test_super_scalar_anchor_D(self, example6, proc_d):
        geo = A.plot_geometry(example6, endpoint_solution(proc_d))
        assert_close(geo.anchor["x"], -0.027, GOLD, "anchor x")
        assert_close(geo.anchor["y"], 0.053, GOLD, "anchor y")
        assert geo.anchor["quadrant"] == "II"

    def test_efficient_focus_on_equator(self, example6):
        geo = A.plot_geometry(example6, M.evaluate(example6, "pt", "B"))
        assert abs(geo.focus["alpha"] - geo.focus["beta"]) <= 1e-9
        vec = geo.vectors["anchor_to_focus"]
        assert vec["tail"] == [0.0, 0.0]

    def test_vector_sum_identity(self, example6, report_runs):
        for sol, rep in report_runs:
            geo = A.plot_geometry(example6, sol)
            oa = geo.vectors["origin_to_anchor"]
            af = geo.vectors["anchor_to_focus"]
            of = geo.vectors["origin_to_focus"]
            assert of["dx"] == pytest.approx(oa["dx"] + af["dx"], abs=1e-12)
            assert of["dy"] == pytest.approx(oa["dy"] + af["dy"], abs=1e-12)
            assert abs(of["slope"] - rep.efficiency) <= 1e-9

    def test_anchor_focus_slope(self, example6, proc_k):
        # the anchor-to-focus slope is the plain price ratio of the focus unit
        sol = proc_k.phase2_solution
        geo = A.plot_geometry(example6, sol)
        j = example6.index_of("K")
        expect = (sol.step2.output_prices @ example6.Y[:, j]) / \
                 (sol.step2.input_prices @ example6.X[:, j])
        assert geo.vectors["anchor_to_focus"]["slope"] == pytest.approx(expect, abs=1e-9)

    def test_points_carry_flags(self, example6):
        geo = A.plot_geometry(example6, M.evaluate(example6, "pt", "K"))
        by_label = {p["label"]: p for p in geo.points}
        assert by_label["K"]["is_focus"]
        assert by_label["B"]["is_reference"]
        assert not by_label["H"]["is_reference"]

    def test_json_document(self, example6):
        geo = A.plot_geometry(example6, M.evaluate(example6, "pt", "K"))
        doc = geo.to_json_dict()
        assert doc["equator"] == {"slope": 1.0, "intercept": 0.0}
        assert len(doc["points"]) == 6
