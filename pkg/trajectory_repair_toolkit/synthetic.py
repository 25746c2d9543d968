"""
Synthetic scenes and trajectories with injected tracking failures.

Agents walk along straight lines from an entry zone to an exit zone. When an agent walks into
an occluder, its track may be split: the first fragment is lost at its first observation inside
the occluder, and a new fragment (with a new id) starts after a random gap. Short erratic noise
tracks are added on top. The generator knows which fragment belongs to which agent, and labels
every fragment with its ground-truth class.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .confidence import CLASS_GROUND_TRUTH, TrajectoryClass
from .exceptions import ConfigError
from .features import FeatureConfig, estimate_neighbor_counts
from .model import (
    ENTRY_KINDS,
    EXIT_KINDS,
    ClassLabel,
    EventKind,
    GroundPoint,
    Observation,
    SceneModel,
    TrackEvent,
    Trajectory,
    Zone,
    ZoneKind,
    contains_point,
    rectangle_outline,
)
from .utils import config_from_mapping

logger = logging.getLogger(__name__)

# Nominal object dimensions (width, height, depth) of walking persons
PERSON_DIMENSIONS = (0.5, 1.7, 0.3)

_MAX_SAMPLING_ATTEMPTS = 1000


@dataclass(frozen=True)
class SynthConfig:
    """Parameters of the synthetic scene and of the agents walking through it."""
    scene_width: float = 20.0
    scene_height: float = 10.0
    strip_width: float = 2.0  # width of the entry (left) and exit (right) strips
    occluders: Tuple[Tuple[float, float, float, float], ...] = ((8.0, 0.0, 11.0, 10.0), )
    p_loss: float = 0.5
    gap_min: float = 1.5
    gap_max: float = 3.0
    agent_count: int = 200
    speed_min: float = 1.0
    speed_max: float = 1.4
    spawn_interval: float = 2.0
    frame_rate: float = 5.0
    position_noise: float = 0.02
    person_prob: float = 0.95
    noise_track_rate: float = 0.1
    noise_track_length: int = 8
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'occluders', tuple(tuple(float(v) for v in rect) for rect in self.occluders))

        if not (0 <= self.p_loss <= 1 and 0 <= self.person_prob <= 1 and self.noise_track_rate >= 0):
            raise ConfigError("Synthetic scene probabilities must lie in [0, 1]")
        if not 0 <= self.gap_min <= self.gap_max:
            raise ConfigError("Synthetic scene gaps must satisfy 0 <= gap_min <= gap_max")
        if not 0 < self.speed_min <= self.speed_max:
            raise ConfigError("Synthetic scene speeds must satisfy 0 < speed_min <= speed_max")
        if self.agent_count < 0 or self.frame_rate <= 0 or self.spawn_interval < 0:
            raise ConfigError("Invalid agent count, frame rate or spawn interval")
        if self.noise_track_length < 2:
            raise ConfigError("Noise tracks need at least 2 observations")
        if any(len(rect) != 4 or rect[0] >= rect[2] or rect[1] >= rect[3] for rect in self.occluders):
            raise ConfigError("Occluders must be (x_min, y_min, x_max, y_max) rectangles with positive area")

    @classmethod
    def from_mapping(cls, mapping):
        return config_from_mapping(cls, mapping, section="synth")


@dataclass(frozen=True)
class SplitRecord:
    """One injected track split: the agent, its lost and its re-appearing fragment."""
    agent_id: str
    lost_fragment: str
    found_fragment: str
    t_lost: float


@dataclass
class SyntheticDataset:
    scene: SceneModel
    trajectories: List[Trajectory]
    truth: Dict[str, Optional[str]]  # fragment id -> agent id (None for noise tracks)
    classes: Dict[str, TrajectoryClass]
    splits: List[SplitRecord] = field(default_factory=list)

    @property
    def gt_values(self):
        return {trajectory_id: CLASS_GROUND_TRUTH[cls] for trajectory_id, cls in self.classes.items()}

    def truth_rows(self):
        """Rows for dataset.save_ground_truth(), in trajectory order."""
        for trajectory in self.trajectories:
            cls = self.classes[trajectory.id]
            yield trajectory.id, self.truth[trajectory.id], cls.label, CLASS_GROUND_TRUTH[cls]


def default_scene(config=None):
    """Scene with an entry strip on the left and an exit strip on the right."""
    config = config or SynthConfig()
    return SceneModel(zones=(
        Zone(1, "ZoneEntryLeft", ZoneKind.ENTRY, rectangle_outline(0.0, 0.0, config.strip_width,
                                                                      config.scene_height)),
        Zone(2, "ZoneExitRight", ZoneKind.EXIT,
             rectangle_outline(config.scene_width - config.strip_width, 0.0, config.scene_width,
                               config.scene_height)),
    ))


def _sample_point(rng, zone):
    x_min, y_min, x_max, y_max = zone.bounds
    for _ in range(_MAX_SAMPLING_ATTEMPTS):
        point = GroundPoint(float(rng.uniform(x_min, x_max)), float(rng.uniform(y_min, y_max)))
        if contains_point(zone, point):
            return point
    raise ConfigError(f"Could not sample a point inside zone {zone.ident} ({zone.name!r})")


def _in_rectangle(rect, x, y):
    return rect[0] <= x <= rect[2] and rect[1] <= y <= rect[3]


def _person_observation(rng, config, frame, x, y, label):
    w, h, d = PERSON_DIMENSIONS
    jitter = rng.uniform(0.97, 1.03, 3)
    return Observation(
        t=frame / config.frame_rate,
        frame=frame,
        position=GroundPoint(x, y),
        width=w * jitter[0],
        height=h * jitter[1],
        depth=d * jitter[2],
        class_label=label,
    )


def _walk_agent(rng, config, start, destination, t_spawn):
    # Observations along the straight path, one per frame, ending at the destination
    speed = rng.uniform(config.speed_min, config.speed_max)
    length = start.distance_to(destination)
    t_arrival = t_spawn + length / speed

    first_frame = int(math.ceil(t_spawn * config.frame_rate))
    last_frame = int(math.ceil(t_arrival * config.frame_rate))

    label = ClassLabel.PERSON if rng.random() < config.person_prob else ClassLabel.UNKNOWN

    observations = []
    true_positions = []
    for frame in range(first_frame, last_frame + 1):
        t = frame / config.frame_rate
        alpha = min(1.0, (t - t_spawn) / (t_arrival - t_spawn)) if t_arrival > t_spawn else 1.0
        x = start.x + alpha * (destination.x - start.x)
        y = start.y + alpha * (destination.y - start.y)
        true_positions.append((x, y))

        nx, ny = rng.normal(0.0, config.position_noise, 2) if config.position_noise > 0 else (0.0, 0.0)
        observations.append(_person_observation(rng, config, frame, float(x + nx), float(y + ny), label))

    return observations, true_positions


def _split_points(rng, config, observations, true_positions):
    # (lost index, resume index) pairs, at most one per occluder
    splits = []
    crossed = set()
    index = 0
    while index < len(observations):
        x, y = true_positions[index]
        for occluder_index, rect in enumerate(config.occluders):
            if occluder_index in crossed or not _in_rectangle(rect, x, y):
                continue
            crossed.add(occluder_index)
            if rng.random() >= config.p_loss:
                continue

            gap = rng.uniform(config.gap_min, config.gap_max)
            t_resume = observations[index].t + gap
            resume = next((i for i in range(index + 1, len(observations)) if observations[i].t >= t_resume), None)
            if resume is None:  # the agent would not re-appear before leaving
                continue
            splits.append((index, resume))
            index = resume - 1
            break
        index += 1
    return splits


def _fragment_events(observations, lost):
    events = [TrackEvent(EventKind.FIRST_DETECTED, observations[0].t, observations[0].position)]
    if lost:
        events.append(TrackEvent(EventKind.LOST, observations[-1].t, observations[-1].position))
    events.append(TrackEvent(EventKind.ENDED, observations[-1].t, observations[-1].position))
    return events


def _noise_track(rng, config, scene_bounds, t_spawn):
    x_min, y_min, x_max, y_max = scene_bounds
    length = int(rng.integers(2, config.noise_track_length + 1))
    first_frame = int(math.ceil(t_spawn * config.frame_rate))

    x = rng.uniform(x_min, x_max)
    y = rng.uniform(y_min, y_max)
    label = ClassLabel.OTHER if rng.random() < 0.5 else ClassLabel.UNKNOWN

    observations = []
    for frame in range(first_frame, first_frame + length):
        observations.append(
            Observation(
                t=frame / config.frame_rate,
                frame=frame,
                position=GroundPoint(float(x), float(y)),
                width=float(rng.uniform(0.1, 2.0)),
                height=float(rng.uniform(0.1, 2.0)),
                depth=float(rng.uniform(0.1, 2.0)),
                class_label=label,
            ))
        heading = rng.uniform(-math.pi, math.pi)
        step = rng.uniform(0.0, 0.5)
        x = float(np.clip(x + step * math.cos(heading), x_min, x_max))
        y = float(np.clip(y + step * math.sin(heading), y_min, y_max))
    return observations


def generate(config=None, scene=None, feature_config=None):
    """
    Generate a synthetic trajectory dataset.

    Parameters
    ----------
    config : SynthConfig, optional
        Generator parameters.
    scene : SceneModel, optional
        Scene with at least one entry-like and one exit-like zone; the default two-strip scene
        is used if not given.
    feature_config : FeatureConfig, optional
        Neighbor radius and time window for the event neighbor counts.

    Returns
    -------
    dataset : SyntheticDataset
        Trajectories (ids assigned in order of first appearance), ground-truth association of
        fragments to agents, ground-truth classes, and the injected splits.
    """
    config = config or SynthConfig()
    scene = scene or default_scene(config)

    entries = scene.zones_of_kind(ENTRY_KINDS)
    exits = scene.zones_of_kind(EXIT_KINDS)
    if not entries or not exits:
        raise ConfigError("The synthetic scene needs at least one entry and one exit zone")

    rng = np.random.default_rng(config.rng_seed)

    # (t_start, order, observations, lost, class, agent id)
    fragments = []
    split_fragments = []  # (agent id, order of the lost fragment, order of the found fragment, t_lost)

    for agent_index in range(config.agent_count):
        agent_id = f"A{agent_index:04d}"
        start = _sample_point(rng, entries[int(rng.integers(len(entries)))])
        destination = _sample_point(rng, exits[int(rng.integers(len(exits)))])

        observations, true_positions = _walk_agent(rng, config, start, destination, agent_index * config.spawn_interval)
        splits = _split_points(rng, config, observations, true_positions)

        bounds = [0]
        for lost_index, resume_index in splits:
            bounds.extend((lost_index + 1, resume_index))
        bounds.append(len(observations))

        pieces = [observations[bounds[i]:bounds[i + 1]] for i in range(0, len(bounds), 2)]
        for piece_index, piece in enumerate(pieces):
            has_start = piece_index == 0
            has_end = piece_index == len(pieces) - 1
            if has_start and has_end:
                cls = TrajectoryClass.COMPLETE
            elif has_start or has_end:
                cls = TrajectoryClass.INCOMPLETE
            else:
                cls = TrajectoryClass.UNRELIABLE

            order = len(fragments)
            fragments.append((piece[0].t, order, piece, not has_end, cls, agent_id))
            if piece_index > 0:
                split_fragments.append((agent_id, order - 1, order, pieces[piece_index - 1][-1].t))

    if config.agent_count:
        span = max(config.agent_count * config.spawn_interval, 1.0)
        x_max = max(zone.bounds[2] for zone in scene.zones)
        y_max = max(zone.bounds[3] for zone in scene.zones)
        x_min = min(zone.bounds[0] for zone in scene.zones)
        y_min = min(zone.bounds[1] for zone in scene.zones)
        for _ in range(int(round(config.noise_track_rate * config.agent_count))):
            observations = _noise_track(rng, config, (x_min, y_min, x_max, y_max), rng.uniform(0.0, span))
            fragments.append((observations[0].t, len(fragments), observations, False, TrajectoryClass.NOISE, None))

    # Ids in order of first appearance
    fragments.sort(key=lambda fragment: fragment[:2])
    ids = {fragment[1]: str(number) for number, fragment in enumerate(fragments, start=1)}

    trajectories = []
    truth = {}
    classes = {}
    for _, order, observations, lost, cls, agent_id in fragments:
        trajectory_id = ids[order]
        trajectories.append(Trajectory(trajectory_id, observations, _fragment_events(observations, lost)))
        truth[trajectory_id] = agent_id
        classes[trajectory_id] = cls

    trajectories = estimate_neighbor_counts(trajectories, feature_config or FeatureConfig(), overwrite=True)

    splits = [
        SplitRecord(agent_id, ids[lost_order], ids[found_order], t_lost)
        for agent_id, lost_order, found_order, t_lost in split_fragments
    ]

    logger.info("Generated %d trajectories from %d agent(s): %d split(s), %d noise track(s)", len(trajectories),
                config.agent_count, len(splits), sum(1 for cls in classes.values() if cls == TrajectoryClass.NOISE))

    return SyntheticDataset(scene=scene, trajectories=trajectories, truth=truth, classes=classes, splits=splits)
