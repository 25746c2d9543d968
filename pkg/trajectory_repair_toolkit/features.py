"""
Trajectory features for confidence computation.

Nine raw features are extracted from every trajectory:

    1. entry zone activated (0/1)       6. number of times lost
    2. exit zone activated (0/1)        7. neighbors at the first/lost/found/end instants (sum)
    3. lifetime, in seconds             8. number of size changes
    4. spatial length                   9. number of direction changes
    5. number of 'person' observations

Features 5 and 8 are normalized by the lifetime; features 3, 4, 6, 7 and 9 are z-scored using
the mean and (population) standard deviation over the learning set.
"""
import logging
from dataclasses import dataclass, fields, replace
from typing import Dict, Tuple

import numpy as np

from .exceptions import ConfigError, FeatureError
from .model import ENTRY_KINDS, EXIT_KINDS, ClassLabel, EventKind, zones_containing
from .utils import config_from_mapping

logger = logging.getLogger(__name__)

NUM_FEATURES = 9

# 1-based indices of the z-scored features
ZSCORE_FEATURES = (3, 4, 6, 7, 9)

# 1-based indices of the features normalized by lifetime
RATE_FEATURES = (5, 8)

FEATURE_NAMES = (
    'entry_zone',
    'exit_zone',
    'lifetime',
    'length',
    'person_rate',
    'lost_count',
    'neighbor_count',
    'size_change_rate',
    'direction_changes',
)

# Event kinds whose neighbor counts make up feature 7
NEIGHBOR_EVENT_KINDS = (EventKind.FIRST_DETECTED, EventKind.LOST, EventKind.FOUND, EventKind.ENDED)


@dataclass(frozen=True)
class FeatureConfig:
    """Thresholds for feature extraction."""
    size_change_ratio: float = 0.3  # relative change of width, height or depth
    direction_angle_deg: float = 45.0  # heading change, in degrees
    min_step: float = 0.05  # shorter displacements are ignored for heading changes
    neighbor_radius: float = 2.0  # neighbor fallback: ground-plane radius
    neighbor_time_window: float = 0.5  # neighbor fallback: +/- seconds around the event

    def __post_init__(self):
        if self.size_change_ratio < 0 or self.min_step < 0 or self.neighbor_radius < 0:
            raise ConfigError("Feature thresholds must be non-negative")
        if not 0 <= self.direction_angle_deg <= 180:
            raise ConfigError("direction_angle_deg must be within [0, 180]")

    @classmethod
    def from_mapping(cls, mapping):
        return config_from_mapping(cls, mapping, section="features")


@dataclass(frozen=True)
class RawFeatureVector:
    entry_activated: int
    exit_activated: int
    time: float
    length: float
    person_count: int
    lost_count: int
    neighbor_sum: int
    size_change_count: int
    direction_change_count: int

    def __post_init__(self):
        assert self.entry_activated in (0, 1) and self.exit_activated in (0, 1)
        assert self.time >= 0 and self.length >= 0

    def as_array(self):
        return np.array([getattr(self, f.name) for f in fields(self)], dtype=np.float64)

    def value(self, index):
        """Feature value by 1-based feature index."""
        return getattr(self, fields(self)[index - 1].name)


@dataclass(frozen=True)
class NormalizationStats:
    """Mean and population standard deviation of the z-scored features, keyed by 1-based index."""
    mu: Dict[int, float]
    sigma: Dict[int, float]
    count: int

    def __post_init__(self):
        if set(self.mu) != set(ZSCORE_FEATURES) or set(self.sigma) != set(ZSCORE_FEATURES):
            raise FeatureError(f"Normalization statistics must cover features {ZSCORE_FEATURES}")
        if any(value < 0 for value in self.sigma.values()):
            raise FeatureError("Normalization standard deviations must be non-negative")

    def to_dict(self):
        return {
            'mu': {FEATURE_NAMES[i - 1]: self.mu[i] for i in ZSCORE_FEATURES},
            'sigma': {FEATURE_NAMES[i - 1]: self.sigma[i] for i in ZSCORE_FEATURES},
            'count': self.count,
        }

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(
                mu={i: float(data['mu'][FEATURE_NAMES[i - 1]]) for i in ZSCORE_FEATURES},
                sigma={i: float(data['sigma'][FEATURE_NAMES[i - 1]]) for i in ZSCORE_FEATURES},
                count=int(data['count']),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise FeatureError(f"Invalid normalization statistics: {e!r}") from None


@dataclass(frozen=True)
class FeatureVector:
    """Normalized features f1..f9 (stored 0-based)."""
    values: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, 'values', tuple(float(v) for v in self.values))
        assert len(self.values) == NUM_FEATURES
        assert self.values[0] in (0.0, 1.0) and self.values[1] in (0.0, 1.0)

    def as_array(self):
        return np.array(self.values, dtype=np.float64)


def _count_size_changes(dimensions, ratio):
    if len(dimensions) < 2:
        return 0
    previous = dimensions[:-1]
    current = dimensions[1:]
    change = np.abs(current - previous)
    safe_previous = np.where(previous > 0, previous, 1.0)
    relative = np.where(previous > 0, change / safe_previous, np.where(change > 0, np.inf, 0.0))
    return int(np.count_nonzero((relative > ratio).any(axis=1)))


def _count_direction_changes(steps, step_lengths, angle_deg, min_step):
    kept = steps[step_lengths >= min_step]
    if len(kept) < 2:
        return 0
    a = kept[:-1]
    b = kept[1:]
    cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    dot = a[:, 0] * b[:, 0] + a[:, 1] * b[:, 1]
    angles = np.degrees(np.abs(np.arctan2(cross, dot)))
    return int(np.count_nonzero(angles > angle_deg))


def extract_raw(trajectory, scene, config=None):
    """
    Extract the nine raw features of a trajectory.

    Parameters
    ----------
    trajectory : Trajectory
        The trajectory.
    scene : SceneModel
        Scene providing the entry, exit and IO zones.
    config : FeatureConfig, optional
        Extraction thresholds; defaults are used if not provided.

    Returns
    -------
    raw : RawFeatureVector
        The raw feature values.
    """
    config = config or FeatureConfig()

    # Gap-filling observations do not count as evidence
    observations = [obs for obs in trajectory.observations if not obs.interpolated]
    first = observations[0]
    last = observations[-1]

    positions = np.array([(obs.position.x, obs.position.y) for obs in observations], dtype=np.float64)
    steps = np.diff(positions, axis=0)
    step_lengths = np.hypot(steps[:, 0], steps[:, 1])

    dimensions = np.array([(obs.width, obs.height, obs.depth) for obs in observations], dtype=np.float64)

    return RawFeatureVector(
        entry_activated=int(bool(zones_containing(scene, first.position, ENTRY_KINDS))),
        exit_activated=int(bool(zones_containing(scene, last.position, EXIT_KINDS))),
        time=float(last.t - first.t),
        length=float(step_lengths.sum()),
        person_count=sum(1 for obs in observations if obs.class_label == ClassLabel.PERSON),
        lost_count=len(trajectory.lost_events),
        neighbor_sum=sum(event.neighbor_count or 0 for event in trajectory.events_of(*NEIGHBOR_EVENT_KINDS)),
        size_change_count=_count_size_changes(dimensions, config.size_change_ratio),
        direction_change_count=_count_direction_changes(
            steps,
            step_lengths,
            config.direction_angle_deg,
            config.min_step,
        ),
    )


def extract_all(trajectories, scene, config=None):
    """Extract raw features for each trajectory, preserving order."""
    return [extract_raw(trajectory, scene, config) for trajectory in trajectories]


def compute_stats(raws):
    """
    Compute normalization statistics over a learning set.

    Parameters
    ----------
    raws : list of RawFeatureVector
        Raw features of all trajectories processed in the learning stage.

    Returns
    -------
    stats : NormalizationStats
        Arithmetic mean and population standard deviation of features 3, 4, 6, 7 and 9.
    """
    if not raws:
        raise FeatureError("Cannot compute normalization statistics of an empty set")

    matrix = np.array([raw.as_array() for raw in raws])
    mu = matrix.mean(axis=0)
    sigma = matrix.std(axis=0)  # ddof=0: population standard deviation

    logger.debug("Normalization statistics computed over %d trajectories", len(raws))

    return NormalizationStats(
        mu={i: float(mu[i - 1]) for i in ZSCORE_FEATURES},
        sigma={i: float(sigma[i - 1]) for i in ZSCORE_FEATURES},
        count=len(raws),
    )


def normalize(raw, stats):
    """
    Normalize raw features.

    Features 1 and 2 are passed through, features 5 and 8 are divided by the lifetime (0 for
    zero-lifetime trajectories), and features 3, 4, 6, 7 and 9 are z-scored (0 when the standard
    deviation is 0).

    Parameters
    ----------
    raw : RawFeatureVector
        Raw features.
    stats : NormalizationStats
        Learning-set statistics.

    Returns
    -------
    features : FeatureVector
        Normalized features f1..f9.
    """
    values = raw.as_array()
    normalized = values.copy()

    lifetime = values[2]
    for i in RATE_FEATURES:
        normalized[i - 1] = values[i - 1] / lifetime if lifetime > 0 else 0.0

    for i in ZSCORE_FEATURES:
        sigma = stats.sigma[i]
        normalized[i - 1] = (values[i - 1] - stats.mu[i]) / sigma if sigma > 0 else 0.0

    return FeatureVector(tuple(normalized))


def feature_matrix(raws, stats):
    """Normalize a list of raw feature vectors into an (N, 9) array."""
    if not raws:
        return np.zeros((0, NUM_FEATURES))
    return np.array([normalize(raw, stats).values for raw in raws], dtype=np.float64)


def estimate_neighbor_counts(trajectories, config=None, overwrite=False):
    """
    Compute event neighbor counts from the trajectories themselves.

    A neighbor of an event is any other trajectory with an observation within
    `config.neighbor_radius` of the event position and within `config.neighbor_time_window`
    seconds of the event time.

    Parameters
    ----------
    trajectories : list of Trajectory
        All trajectories of the recording.
    config : FeatureConfig, optional
        Neighbor radius and time window.
    overwrite : bool, optional
        If False, only events without a neighbor count are filled in.

    Returns
    -------
    trajectories : list of Trajectory
        Trajectories with updated event neighbor counts, in the input order.
    """
    config = config or FeatureConfig()
    if not trajectories:
        return []

    owners = np.concatenate([np.full(len(tr.observations), idx) for idx, tr in enumerate(trajectories)])
    times = np.concatenate([[obs.t for obs in tr.observations] for tr in trajectories])
    positions = np.concatenate([tr.positions_array() for tr in trajectories])

    order = np.argsort(times, kind='stable')
    times = times[order]
    owners = owners[order]
    positions = positions[order]

    window = config.neighbor_time_window
    radius = config.neighbor_radius

    updated = []
    for idx, trajectory in enumerate(trajectories):
        events = []
        for event in trajectory.events:
            if event.neighbor_count is not None and not overwrite:
                events.append(event)
                continue

            lo = np.searchsorted(times, event.t - window, side='left')
            hi = np.searchsorted(times, event.t + window, side='right')
            candidate_owners = owners[lo:hi]
            offsets = positions[lo:hi] - (event.position.x, event.position.y)
            near = (np.hypot(offsets[:, 0], offsets[:, 1]) <= radius) & (candidate_owners != idx)

            events.append(replace(event, neighbor_count=int(len(np.unique(candidate_owners[near])))))
        updated.append(replace(trajectory, events=tuple(events)))

    return updated
