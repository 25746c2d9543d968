from dataclasses import replace

import numpy as np
import pytest

from trajectory_repair_toolkit.exceptions import ConfigError, FeatureError
from trajectory_repair_toolkit.features import (
    NUM_FEATURES,
    RATE_FEATURES,
    ZSCORE_FEATURES,
    FeatureConfig,
    NormalizationStats,
    RawFeatureVector,
    compute_stats,
    estimate_neighbor_counts,
    extract_all,
    extract_raw,
    feature_matrix,
    normalize,
)
from trajectory_repair_toolkit.model import ClassLabel


def test_extract_raw(corridor_scene, make_trajectory):
    # Walks from the entry strip to the exit strip, with one sharp turn and one size jump
    trajectory = make_trajectory(
        "1",
        [(0.0, 1.0, 5.0), (1.0, 4.0, 5.0), (2.0, 7.0, 5.0), (3.0, 7.0, 8.0), (4.0, 19.0, 8.0)],
        lost_at=(1, ),
        found_at=(2, ),
        neighbor_count=1,
    )
    observations = list(trajectory.observations)
    observations[-1] = replace(observations[-1], width=1.0, class_label=ClassLabel.OTHER)
    trajectory = replace(trajectory, observations=observations)

    raw = extract_raw(trajectory, corridor_scene)
    assert raw.entry_activated == 1
    assert raw.exit_activated == 1
    assert raw.time == 4.0
    assert raw.length == pytest.approx(3.0 + 3.0 + 3.0 + 12.0)
    assert raw.person_count == 4
    assert raw.lost_count == 1
    assert raw.neighbor_sum == 4  # first, lost, found and end events
    assert raw.size_change_count == 1
    assert raw.direction_change_count == 2  # +90 degrees, then -90 degrees


def test_extract_raw_outside_zones(corridor_scene, make_trajectory):
    trajectory = make_trajectory("1", [(0.0, 12.0, 5.0), (0.5, 12.5, 5.0)], ended=False)
    raw = extract_raw(trajectory, corridor_scene)
    assert (raw.entry_activated, raw.exit_activated) == (0, 0)
    assert raw.lost_count == 0
    assert raw.direction_change_count == 0


def test_short_steps_do_not_change_direction(corridor_scene, make_trajectory):
    samples = [(0.0, 10.0, 5.0), (1.0, 11.0, 5.0), (2.0, 11.01, 5.01), (3.0, 11.0, 5.0), (4.0, 12.0, 5.0)]
    raw = extract_raw(make_trajectory("1", samples), corridor_scene, FeatureConfig(min_step=0.05))
    assert raw.direction_change_count == 0


def test_normalized_moments(small_synthetic_dataset):
    trajectories = small_synthetic_dataset.trajectories
    assert len(trajectories) >= 40

    raws = extract_all(trajectories, small_synthetic_dataset.scene)
    stats = compute_stats(raws)
    matrix = feature_matrix(raws, stats)
    assert matrix.shape == (len(trajectories), NUM_FEATURES)

    for index in ZSCORE_FEATURES:
        column = matrix[:, index - 1]
        if stats.sigma[index] > 0:
            assert abs(column.mean()) < 1e-9
            assert abs(column.std() - 1.0) < 1e-9
        else:
            assert np.all(column == 0.0)


def test_normalize_rate_features():
    stats = NormalizationStats(mu=dict.fromkeys(ZSCORE_FEATURES, 0.0), sigma=dict.fromkeys(ZSCORE_FEATURES, 1.0),
                               count=1)

    raw = RawFeatureVector(1, 0, 2.0, 5.0, 10, 1, 3, 4, 2)
    features = normalize(raw, stats).values
    assert features[0] == 1.0 and features[1] == 0.0
    assert features[4] == pytest.approx(5.0)  # 10 person observations in 2 seconds
    assert features[7] == pytest.approx(2.0)  # 4 size changes in 2 seconds

    # Zero lifetime
    raw = RawFeatureVector(0, 0, 0.0, 0.0, 1, 0, 0, 0, 0)
    features = normalize(raw, stats).values
    for index in RATE_FEATURES:
        assert features[index - 1] == 0.0


def test_normalize_zero_sigma():
    stats = NormalizationStats(mu=dict.fromkeys(ZSCORE_FEATURES, 3.0), sigma=dict.fromkeys(ZSCORE_FEATURES, 0.0),
                               count=5)
    features = normalize(RawFeatureVector(0, 1, 3.0, 7.0, 0, 2, 5, 0, 1), stats).values
    for index in ZSCORE_FEATURES:
        assert features[index - 1] == 0.0


def test_stats_round_trip_and_validation():
    stats = NormalizationStats(mu=dict.fromkeys(ZSCORE_FEATURES, 1.5), sigma=dict.fromkeys(ZSCORE_FEATURES, 0.5),
                               count=10)
    assert NormalizationStats.from_dict(stats.to_dict()) == stats

    with pytest.raises(FeatureError):
        NormalizationStats.from_dict({'mu': {}, 'sigma': {}, 'count': 0})
    with pytest.raises(FeatureError):
        compute_stats([])


def test_estimate_neighbor_counts(make_trajectory):
    near_a = make_trajectory("a", [(0.0, 5.0, 5.0), (1.0, 6.0, 5.0)], neighbor_count=None)
    near_b = make_trajectory("b", [(0.0, 5.5, 5.0), (1.0, 6.5, 5.0)], neighbor_count=None)
    far = make_trajectory("c", [(0.0, 50.0, 5.0), (1.0, 51.0, 5.0)], neighbor_count=None)

    updated = estimate_neighbor_counts([near_a, near_b, far], FeatureConfig(neighbor_radius=1.0,
                                                                            neighbor_time_window=0.1))
    assert [event.neighbor_count for event in updated[0].events] == [1, 1]
    assert [event.neighbor_count for event in updated[1].events] == [1, 1]
    assert [event.neighbor_count for event in updated[2].events] == [0, 0]

    # Existing counts are kept unless overwritten
    kept = estimate_neighbor_counts([make_trajectory("d", [(0.0, 5.0, 5.0)], neighbor_count=4), near_b])
    assert kept[0].events[0].neighbor_count == 4


def test_feature_config_validation():
    with pytest.raises(ConfigError):
        FeatureConfig(direction_angle_deg=270.0)
    with pytest.raises(ConfigError):
        FeatureConfig.from_mapping({'bogus': 1})


def test_stats_and_normalization_of_three_values():
    raws = [RawFeatureVector(0, 0, value, 0.0, 0, 0, 0, 0, 0) for value in (2.0, 4.0, 6.0)]
    stats = compute_stats(raws)
    assert stats.mu[3] == pytest.approx(4.0)
    assert stats.sigma[3] == pytest.approx(np.sqrt(8.0 / 3.0))
    assert stats.sigma[4] == 0.0

    normalized = [normalize(raw, stats).values[2] for raw in raws]
    assert normalized == pytest.approx([-1.224745, 0.0, 1.224745], abs=1e-6)


def test_stats_of_single_vector():
    raw = RawFeatureVector(1, 0, 5.0, 3.0, 2, 1, 4, 0, 2)
    stats = compute_stats([raw])
    assert stats.count == 1
    for index in ZSCORE_FEATURES:
        assert stats.mu[index] == raw.value(index)
        assert stats.sigma[index] == 0.0
