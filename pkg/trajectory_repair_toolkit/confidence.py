"""
Trajectory confidence value, trajectory classes, and noise filtering.

The confidence value is a weighted sum of the normalized features, where features 1-5 count
directly and features 6-9 count inversely:

    CV = sum_{i=1..5} w_i * f_i + sum_{i=6..9} w_i * (1 - f_i)
"""
import csv
import enum
import json
import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .exceptions import ConfigError, TrajectoryFileError, WeightError
from .features import FEATURE_NAMES, NUM_FEATURES, FeatureConfig, NormalizationStats, extract_raw, normalize
from .utils import config_from_mapping

logger = logging.getLogger(__name__)

# Number of leading features that are directly proportional to the confidence value
NUM_DIRECT_FEATURES = 5

WEIGHT_SUM_TOLERANCE = 1e-9

# Class bounds on the [0..1] confidence scale; boundary values belong to the higher class
COMPLETE_THRESHOLD = 0.8
INCOMPLETE_THRESHOLD = 0.5
UNRELIABLE_THRESHOLD = 0.2

NOISE_THRESHOLD = UNRELIABLE_THRESHOLD


class TrajectoryClass(enum.IntEnum):
    """Trajectory classes, totally ordered: Complete > Incomplete > Unreliable > Noise."""
    NOISE = 0
    UNRELIABLE = 1
    INCOMPLETE = 2
    COMPLETE = 3

    @property
    def label(self):
        return self.name.lower()

    @classmethod
    def from_label(cls, label):
        try:
            return cls[label.strip().upper()]
        except KeyError:
            raise ValueError(f"Unknown trajectory class {label!r}") from None


# Representative ground-truth value of each class (middle of its confidence band)
CLASS_GROUND_TRUTH = {
    TrajectoryClass.COMPLETE: 0.9,
    TrajectoryClass.INCOMPLETE: 0.65,
    TrajectoryClass.UNRELIABLE: 0.35,
    TrajectoryClass.NOISE: 0.1,
}


@dataclass(frozen=True)
class ConfidenceConfig:
    noise_threshold: float = NOISE_THRESHOLD
    complete_threshold: float = COMPLETE_THRESHOLD

    @classmethod
    def from_mapping(cls, mapping):
        config = config_from_mapping(cls, mapping, section="confidence")
        if not all(math.isfinite(v) for v in (config.noise_threshold, config.complete_threshold)):
            raise ConfigError("Confidence thresholds must be finite")
        return config


@dataclass(frozen=True)
class WeightVector:
    """Nine non-negative feature weights summing to 1."""
    values: Tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, 'values', values)

        if len(values) != NUM_FEATURES:
            raise WeightError(f"Expected {NUM_FEATURES} weights, got {len(values)}")
        if not all(math.isfinite(v) and v >= 0 for v in values):
            raise WeightError(f"Weights must be finite and non-negative: {values}")
        total = math.fsum(values)
        if abs(total - 1.0) > WEIGHT_SUM_TOLERANCE:
            raise WeightError(f"Weights must sum to 1, got {total!r}")

    @classmethod
    def uniform(cls):
        return cls((1.0 / NUM_FEATURES, ) * NUM_FEATURES)

    @classmethod
    def from_array(cls, array):
        return cls(tuple(np.asarray(array, dtype=np.float64)))

    def as_array(self):
        return np.array(self.values, dtype=np.float64)

    def to_dict(self):
        return dict(zip(FEATURE_NAMES, self.values))

    @classmethod
    def from_dict(cls, data):
        missing = [name for name in FEATURE_NAMES if name not in data]
        if missing:
            raise WeightError(f"Missing weight(s): {', '.join(missing)}")
        unknown = sorted(set(data) - set(FEATURE_NAMES))
        if unknown:
            raise WeightError(f"Unknown weight(s): {', '.join(unknown)}")
        try:
            return cls(tuple(float(data[name]) for name in FEATURE_NAMES))
        except (TypeError, ValueError):
            raise WeightError("Weights must be numbers") from None


def transform_features(features):
    """
    Map normalized features to their confidence contributions.

    Parameters
    ----------
    features : numpy.ndarray
        Array of normalized features, with the nine features along the last axis.

    Returns
    -------
    contributions : numpy.ndarray
        Array of the same shape holding f_i for i <= 5 and 1 - f_i for i >= 6.
    """
    contributions = np.array(features, dtype=np.float64, copy=True)
    contributions[..., NUM_DIRECT_FEATURES:] = 1.0 - contributions[..., NUM_DIRECT_FEATURES:]
    return contributions


def confidence_value(features, weights):
    """
    Compute the confidence value of a trajectory.

    Parameters
    ----------
    features : FeatureVector
        Normalized features f1..f9.
    weights : WeightVector
        Feature weights w1..w9.

    Returns
    -------
    cv : float
        The confidence value.
    """
    contributions = transform_features(features.as_array())
    return float(math.fsum(contributions * weights.as_array()))


def confidence_values(features, weights):
    """
    Vectorized confidence values.

    Parameters
    ----------
    features : numpy.ndarray
        (N, 9) array of normalized features.
    weights : numpy.ndarray
        (9,) weight vector or (M, 9) array of weight vectors.

    Returns
    -------
    cvs : numpy.ndarray
        (N,) array for a single weight vector, (N, M) array otherwise.
    """
    return transform_features(features) @ np.asarray(weights, dtype=np.float64).T


def classify(cv):
    """
    Map a confidence value to its trajectory class.

    Thresholds are 0.8 (Complete), 0.5 (Incomplete) and 0.2 (Unreliable); values below 0.2 are
    Noise. Boundary values belong to the higher class. Defined for all real values.
    """
    if cv >= COMPLETE_THRESHOLD:
        return TrajectoryClass.COMPLETE
    if cv >= INCOMPLETE_THRESHOLD:
        return TrajectoryClass.INCOMPLETE
    if cv >= UNRELIABLE_THRESHOLD:
        return TrajectoryClass.UNRELIABLE
    return TrajectoryClass.NOISE


class ConfidenceScorer:
    """
    Confidence scoring of trajectories within a scene, with learned weights and statistics.

    Parameters
    ----------
    scene : SceneModel
        Scene providing the entry, exit and IO zones for features 1 and 2.
    weights : WeightVector
        Feature weights.
    stats : NormalizationStats
        Learning-set normalization statistics.
    feature_config : FeatureConfig, optional
        Feature extraction thresholds.
    """

    def __init__(self, scene, weights, stats, feature_config=None):
        self.scene = scene
        self.weights = weights
        self.stats = stats
        self.feature_config = feature_config or FeatureConfig()

    def features(self, trajectory):
        return normalize(extract_raw(trajectory, self.scene, self.feature_config), self.stats)

    def score(self, trajectory):
        return confidence_value(self.features(trajectory), self.weights)

    def score_all(self, trajectories):
        return [self.score(trajectory) for trajectory in trajectories]

    def classify(self, trajectory):
        return classify(self.score(trajectory))


def filter_noise(trajectories, scorer, threshold=NOISE_THRESHOLD):
    """
    Split trajectories into kept and noisy ones by their confidence value.

    Parameters
    ----------
    trajectories : iterable of Trajectory
        Trajectories to filter.
    scorer : ConfidenceScorer
        Scorer holding the scene, weights and normalization statistics.
    threshold : float, optional
        Trajectories with a confidence value below the threshold are noise.

    Returns
    -------
    kept : list of Trajectory
        Trajectories with confidence value >= threshold, in input order.
    noise : list of Trajectory
        Trajectories with confidence value < threshold, in input order.
    """
    kept = []
    noise = []
    for trajectory in trajectories:
        (noise if scorer.score(trajectory) < threshold else kept).append(trajectory)

    logger.debug("Noise filter (threshold %g): kept %d, noise %d", threshold, len(kept), len(noise))
    return kept, noise


def save_weights(filename, weights, stats, training_info=None):
    """
    Save learned weights together with the normalization statistics to a JSON file.

    Parameters
    ----------
    filename : str
        Output JSON file name.
    weights : WeightVector
        Learned feature weights.
    stats : NormalizationStats
        Normalization statistics used when learning the weights.
    training_info : dict, optional
        Additional information about the training run (fitness, generations, ...).
    """
    document = {
        'weights': weights.to_dict(),
        'normalization': stats.to_dict(),
    }
    if training_info is not None:
        document['training'] = training_info

    with open(filename, 'w', encoding='utf-8', newline='\n') as fp:
        json.dump(document, fp, indent=2)
        fp.write("\n")


def load_weights(filename):
    """
    Load weights and normalization statistics from a JSON file written by save_weights().

    Returns
    -------
    weights : WeightVector
        Feature weights (validated: non-negative, summing to 1).
    stats : NormalizationStats
        Normalization statistics.
    """
    try:
        with open(filename, 'r', encoding='utf-8') as fp:
            document = json.load(fp)
    except json.JSONDecodeError as e:
        raise WeightError(f"Malformed weights file: {e.msg}", source=filename, line=e.lineno) from None

    if not isinstance(document, dict) or 'weights' not in document or 'normalization' not in document:
        raise WeightError("Weights file must contain 'weights' and 'normalization' entries", source=filename)

    try:
        weights = WeightVector.from_dict(document['weights'])
    except WeightError as e:
        raise e.with_source(filename)

    try:
        stats = NormalizationStats.from_dict(document['normalization'])
    except ValueError as e:
        raise WeightError(str(e), source=filename) from None

    return weights, stats


SCORE_COLUMNS = ('trajectory_id', 'cv', 'class')


def save_scores(filename, trajectories, cvs):
    """Write the confidence value and class of every trajectory to a CSV file."""
    with open(filename, 'w', encoding='utf-8', newline='') as fp:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(SCORE_COLUMNS)
        for trajectory, cv in zip(trajectories, cvs):
            writer.writerow([trajectory.id, repr(float(cv)), classify(cv).label])


def load_scores(filename):
    """
    Read a score file written by save_scores().

    Returns
    -------
    scores : dict
        Mapping trajectory id -> confidence value, in file order.
    """
    scores = {}
    with open(filename, 'r', encoding='utf-8', newline='') as fp:
        reader = csv.DictReader(fp)
        if tuple(reader.fieldnames or ()) != SCORE_COLUMNS:
            raise TrajectoryFileError(f"Expected header {','.join(SCORE_COLUMNS)}", source=filename, line=1)
        for line, row in enumerate(reader, start=2):
            try:
                scores[row['trajectory_id']] = float(row['cv'])
            except (TypeError, ValueError):
                raise TrajectoryFileError(f"Invalid confidence value {row['cv']!r}", source=filename,
                                          line=line) from None
    return scores
