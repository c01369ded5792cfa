import pytest

from cit import RateConfig, binary_entropy, rate_report
from cit.sources import bss_pmf

LIGHT = RateConfig(continuous_restarts=4, continuous_max_iter=1200,
                   wyner_restarts=4, wyner_max_iter=1200)


class TestBss:
    def test_quarter_report(self):
        rep = rate_report(bss_pmf(0.25), 2, LIGHT)
        h = binary_entropy(0.25)
        assert rep.mi == pytest.approx(1 - h, abs=1e-9)
        assert rep.sk_capacity == rep.mi
        assert rep.cir_ub == pytest.approx(1.0, abs=1e-12)
        assert rep.r_sk_r == pytest.approx(h, abs=1e-9)
        assert rep.r_ni == pytest.approx(h, abs=1e-9)
        assert rep.provenance["cir_ub"].startswith("exact")

    def test_copy_source(self, uniform_copy):
        rep = rate_report(uniform_copy, 2, LIGHT)
        assert rep.mi == pytest.approx(1.0, abs=1e-12)
        assert rep.cir_ub == pytest.approx(1.0, abs=1e-9)
        assert rep.r_sk_r == pytest.approx(0.0, abs=1e-9)
        assert rep.r_ni == pytest.approx(0.0, abs=1e-12)
        assert rep.gk_ci == pytest.approx(1.0, abs=1e-12)

    def test_independent(self, independent):
        rep = rate_report(independent, 2, LIGHT)
        assert rep.mi == 0.0
        assert rep.cir_ub == pytest.approx(0.0, abs=1e-9)


class TestGain:
    def test_interaction_gap(self, gain):
        rep = rate_report(gain, 2, LIGHT)
        assert rep.r_sk_r < rep.r_ni
        gap = rep.r_ni - rep.r_sk_r
        assert 0.02 <= gap <= 0.03
        assert rep.cir_ub < min(rep.ci1_x, rep.ci1_y)
        assert rep.provenance["cir_ub"] == "upper bound"


class TestInvariants:
    @pytest.mark.parametrize("delta", [0.1, 0.4])
    def test_orderings(self, delta):
        rep = rate_report(bss_pmf(delta), 2, LIGHT)
        assert rep.sk_capacity == rep.mi
        assert rep.r_sk_r == rep.cir_ub - rep.mi
        assert rep.gk_ci <= rep.mi + 1e-9
        assert rep.mi <= rep.wyner_ub + 1e-6
        assert rep.cir_ub <= min(rep.ci1_x, rep.ci1_y) + 1e-9

    def test_round_one_exact(self, gain):
        rep = rate_report(gain, 1, LIGHT)
        assert rep.cir_ub == rep.ci1_x
        assert rep.provenance["cir_ub"].startswith("exact")

    def test_json_fields(self, gain):
        blob = rate_report(gain, 2, LIGHT).to_json()
        for key in ("h_x", "h_y", "mi", "sk_capacity", "gk_ci", "wyner_ub",
                    "ci1_x", "ci1_y", "cir_ub", "r_ni", "r_sk_r", "rounds",
                    "provenance"):
            assert key in blob
