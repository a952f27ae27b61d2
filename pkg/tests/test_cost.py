"""Cost normalization and budget-capped collection runs."""

import pytest

from stratlearn.backends import SyntheticBackend, SyntheticLandscape, Verdict
from stratlearn.cost import CostConfig, collect_cost, normalize
from stratlearn.space import Strategy


class TestNormalize:
    def test_baseline_run_costs_one(self):
        assert normalize(1000.0, 1000.0) == 1.0

    def test_half_effort_costs_half(self):
        assert normalize(500.0, 1000.0) == 0.5

    def test_free_solve(self):
        assert normalize(0.0, 7.0) == 0.0

    def test_nonpositive_baseline_rejected(self):
        with pytest.raises(ValueError, match="baseline"):
            normalize(1.0, 0.0)

    def test_negative_raw_rejected(self):
        with pytest.raises(ValueError):
            normalize(-1.0, 1.0)

    def test_preserves_raw_metric_order(self):
        baseline = 321.0
        metrics = [5.0, 17.0, 17.0, 200.0, 4000.0]
        costs = [normalize(m, baseline) for m in metrics]
        assert costs == sorted(costs)


def penalty_backend(weight: float, base: float = 100.0, n: int = 3) -> SyntheticBackend:
    landscape = SyntheticLandscape(
        optimum=("1",),
        weights=(weight,),
        base_metrics=(base,) * n,
        verdicts=(Verdict.UNSAT,) * n,
    )
    return SyntheticBackend(landscape)


class TestCollectCost:
    def test_matching_baseline_costs_one(self):
        backend = penalty_backend(weight=0.5)
        record = collect_cost(backend, 1, Strategy(("1",)), baseline_metric=100.0)
        assert record.cost == 1.0
        assert not record.aborted
        assert record.raw_metric == 100.0

    def test_quarter_effort(self):
        backend = penalty_backend(weight=0.5)
        record = collect_cost(backend, 1, Strategy(("1",)), baseline_metric=400.0)
        assert record.cost == 0.25

    def test_budget_exhaustion_caps_cost_at_multiplier(self):
        config = CostConfig(abort_multiplier=10.0)
        backend = penalty_backend(weight=20.0)  # mismatch metric = 2100 > 10 * 100
        record = collect_cost(backend, 1, Strategy(("0",)), baseline_metric=100.0, config=config)
        assert record.aborted
        assert record.cost == 10.0

    def test_cost_never_exceeds_multiplier(self):
        config = CostConfig(abort_multiplier=3.0)
        for weight in (0.0, 1.0, 2.5, 50.0):
            backend = penalty_backend(weight=weight)
            record = collect_cost(backend, 1, Strategy(("0",)), baseline_metric=100.0, config=config)
            assert record.cost <= 3.0

    def test_mismatch_penalty_arithmetic(self):
        backend = penalty_backend(weight=0.5, base=100.0)
        record = collect_cost(backend, 2, Strategy(("0",)), baseline_metric=100.0)
        assert record.raw_metric == 150.0
        assert record.cost == 1.5

    def test_requires_positive_baseline(self):
        backend = penalty_backend(weight=0.5)
        with pytest.raises(ValueError, match="baseline"):
            collect_cost(backend, 1, Strategy(("1",)), baseline_metric=0.0)


class TestCostConfig:
    def test_abort_multiplier_must_exceed_one(self):
        with pytest.raises(ValueError):
            CostConfig(abort_multiplier=1.0)

    def test_metric_kind_checked(self):
        with pytest.raises(ValueError, match="metric kind"):
            CostConfig(metric_kind="wallclock")

    def test_virtual_time_kind_accepted(self):
        assert CostConfig(metric_kind="virtual_time").metric_kind == "virtual_time"
