import numpy as np
import pytest

from multireg import ExtractionConfig, InstanceHypothesis, extract

from conftest import make_transform

CFG = ExtractionConfig()


def hyp(count, seed=0):
    return InstanceHypothesis(make_transform(seed), np.arange(count))


def counts(hypotheses):
    return [h.inlier_count for h in hypotheses]


class TestExtract:
    def test_drop_ratio_cuts_tail(self):
        # 40/100 = 0.4 <= 0.5 cuts the tail after [100, 80, 60]
        kept = extract([hyp(100), hyp(80), hyp(60), hyp(40)], CFG)
        assert counts(kept) == [100, 80, 60]

    def test_sorts_before_prefix_rule(self):
        # sorted [100, 70, 49]: 0.7 keeps, 0.49 cuts
        kept = extract([hyp(100), hyp(49), hyp(70)], CFG)
        assert counts(kept) == [100, 70]

    def test_strict_size_filter(self):
        assert counts(extract([hyp(11)], CFG)) == [11]
        assert extract([hyp(10)], CFG) == []

    def test_empty_input(self):
        assert extract([], CFG) == []

    def test_top_survivor_always_kept(self):
        kept = extract([hyp(12)], ExtractionConfig(min_cluster_size=10, gamma_thresh=1.0))
        assert counts(kept) == [12]

    def test_output_is_sorted_prefix(self):
        rng = np.random.default_rng(0)
        hyps = [hyp(int(c), seed=i) for i, c in enumerate(rng.integers(5, 120, size=12))]
        kept = extract(hyps, CFG)
        got = counts(kept)
        assert got == sorted(got, reverse=True)
        if kept:
            top = got[0]
            assert all(c > CFG.min_cluster_size for c in got)
            assert all(c / top > CFG.gamma_thresh for c in got[1:])

    def test_ties_keep_input_order(self):
        a, b = hyp(50, seed=1), hyp(50, seed=2)
        kept = extract([a, b], CFG)
        assert kept[0] is a and kept[1] is b

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ExtractionConfig(min_cluster_size=2)
        with pytest.raises(ValueError):
            ExtractionConfig(gamma_thresh=0.0)
