import math

import numpy as np
import pytest

from services.errors import ConfigError, DataError
from services.influence_service import (
    InfluenceParams,
    InfluenceService,
    adjusted_weight,
    compute_gaps,
    compute_iidf,
    compute_itf,
    compute_weight,
    normalize_weights,
)
from services.post_loader import ingest


PARAMS = InfluenceParams()
# Observed comment pacing held fixed while engagement counts vary
PACING = [0, 20, 45]


class TestItf:
    def test_single_comment_no_followers(self, make_post):
        assert compute_itf(make_post(comments=1), PARAMS) == 1.0

    def test_zero_engagement(self, make_post):
        assert compute_itf(make_post(followers=12345), PARAMS) == 0.0

    def test_hand_arithmetic(self, make_post):
        post = make_post(comments=3, likes=5, reposts=2, followers=99)
        assert compute_itf(post, PARAMS) == pytest.approx(0.1, abs=1e-12)


class TestGaps:
    def test_observed_times(self, make_post):
        post = make_post(comments=3, comment_minutes=[0, 30, 90])
        count, gaps = compute_gaps(post, PARAMS)
        assert count == 3
        assert gaps == pytest.approx([0.5, 1.0], abs=1e-12)

    def test_no_comments(self, make_post):
        assert compute_gaps(make_post(), PARAMS) == (0, [1.0])

    def test_counts_only_imputes_unit_gaps(self, make_post):
        count, gaps = compute_gaps(make_post(comments=5), PARAMS)
        assert count == 5
        assert gaps == [1.0, 1.0, 1.0, 1.0]
        assert compute_iidf(count, gaps, PARAMS) == pytest.approx(math.log(1 + 5 / 4), abs=1e-12)

    def test_observed_times_override_count(self, make_post):
        count, _ = compute_gaps(make_post(comments=10, comment_minutes=[0, 60]), PARAMS)
        assert count == 2


class TestIidf:
    def test_zero_comments(self):
        assert compute_iidf(0, [1.0], PARAMS) == 0.0

    def test_short_branch_uses_largest_gap(self):
        assert compute_iidf(2, [1.0], PARAMS) == pytest.approx(math.log(3), abs=1e-12)

    def test_long_branch_uses_total_duration(self):
        assert compute_iidf(4, [0.5, 0.5, 1.0], PARAMS) == pytest.approx(math.log(3), abs=1e-12)

    def test_simultaneous_comments_are_finite_and_fastest(self):
        burst = compute_iidf(3, [0.0, 0.0], PARAMS)
        slow = compute_iidf(3, [0.5, 0.5], PARAMS)
        assert math.isfinite(burst)
        assert burst > slow

    def test_millisecond_burst_scores_like_simultaneous(self):
        one_ms = 1e-3 / 3600.0
        simultaneous = compute_iidf(3, [0.0, 0.0], PARAMS)
        burst = compute_iidf(3, [one_ms, one_ms], PARAMS)
        assert simultaneous >= burst
        assert burst == pytest.approx(simultaneous, abs=1e-12)


class TestWeightProperties:
    @pytest.mark.parametrize('field', ['comments', 'likes', 'reposts'])
    def test_nondecreasing_in_engagement(self, make_post, field):
        rng = np.random.default_rng(3)
        for _ in range(20):
            base = {'comments': int(rng.integers(0, 6)), 'likes': int(rng.integers(0, 50)),
                    'reposts': int(rng.integers(0, 10)), 'followers': int(rng.integers(0, 500))}
            bumped = dict(base, **{field: base[field] + int(rng.integers(1, 5))})
            (before,) = compute_weight([make_post(comment_minutes=PACING, **base)], PARAMS)
            (after,) = compute_weight([make_post(comment_minutes=PACING, **bumped)], PARAMS)
            assert after.adjusted >= before.adjusted

    def test_nonincreasing_in_mean_gap(self, make_post):
        rng = np.random.default_rng(4)
        for _ in range(20):
            minutes = [float(m) for m in np.cumsum(rng.uniform(1, 60, size=4))]
            factor = float(rng.uniform(1.1, 3.0))
            stretched = [m * factor for m in minutes]
            (fast,) = compute_weight([make_post(comments=4, likes=3, followers=10,
                                                comment_minutes=minutes)], PARAMS)
            (slow,) = compute_weight([make_post(comments=4, likes=3, followers=10,
                                                comment_minutes=stretched)], PARAMS)
            assert slow.mean_gap > fast.mean_gap
            assert slow.adjusted <= fast.adjusted

    def test_scale_free_normalization(self):
        adjusted = list(np.random.default_rng(5).uniform(0, 3, size=8))
        for factor in (1e-3, 0.5, 7.0, 1e4):
            scaled = normalize_weights([value * factor for value in adjusted])
            assert scaled == pytest.approx(normalize_weights(adjusted), abs=1e-12)


class TestWeights:
    def test_hacker_news_decay(self):
        assert adjusted_weight(3.0, 0.0, PARAMS) == pytest.approx(3 / 2 ** 1.5, abs=1e-12)
        assert adjusted_weight(3.0, 0.0, PARAMS) == pytest.approx(1.06066, abs=1e-5)

    def test_single_post_normalizes_to_one(self, make_post):
        (weight,) = compute_weight([make_post(comments=2, likes=1, followers=1)], PARAMS)
        assert weight.weight == 1.0

    def test_max_normalization(self):
        assert normalize_weights([2.0, 4.0]) == [0.5, 1.0]

    def test_zero_engagement_corpus(self, make_post):
        weights = compute_weight([make_post(post_id='a'), make_post(post_id='b', followers=10)], PARAMS)
        assert [w.weight for w in weights] == [0.0, 0.0]

    def test_full_chain(self, make_post):
        post = make_post(comments=3, likes=5, reposts=2, followers=99, comment_minutes=[0, 30, 90])
        (weight,) = compute_weight([post], PARAMS)
        iidf = math.log(1 + 3 / 1.5)
        assert weight.itf == pytest.approx(0.1, abs=1e-12)
        assert weight.iidf == pytest.approx(iidf, abs=1e-12)
        assert weight.attention == pytest.approx(0.1 * iidf, abs=1e-12)
        assert weight.mean_gap == pytest.approx(0.75, abs=1e-12)
        assert weight.adjusted == pytest.approx(0.1 * iidf / 2.75 ** 1.5, abs=1e-12)
        assert not weight.pacing_imputed

    def test_pacing_imputed_flag(self, make_post):
        weights = compute_weight([make_post(post_id='a', comments=4, likes=1),
                                  make_post(post_id='b', comments=1, likes=1)], PARAMS)
        assert [w.pacing_imputed for w in weights] == [True, False]

    def test_empty_post_list(self):
        with pytest.raises(DataError):
            compute_weight([], PARAMS)

    def test_non_positive_parameter(self):
        with pytest.raises(ConfigError):
            InfluenceParams(tau0=0.0)

    def test_mini_corpus(self, mini_corpus_path):
        service = InfluenceService()
        weights = service.weigh(ingest(mini_corpus_path))
        values = [w.weight for w in weights]
        assert max(values) == 1.0
        assert min(values) >= 0.0
        assert weights[9].weight == 0.0
        summary = service.summarize(weights)
        assert summary['posts'] == 12
        assert summary['nonzero'] == 11
