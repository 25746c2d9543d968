"""
Repair of lost trajectories.

When a track appears in an abnormal location (not in an entry or IO zone) that lies in a found
or lost-found zone, the zone triplets ending in that found zone are scanned by priority, and the
first lost trajectory that started in the triplet's start zone, was lost in its lost zone, and
was lost between the triplet's minimum and maximum time ago is fused with the new track.
"""
import csv
import logging
import time
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .exceptions import ConfigError, TrajectoryFileError
from .model import (
    ENTRY_KINDS,
    FOUND_KINDS,
    LOST_KINDS,
    EventKind,
    GroundPoint,
    Observation,
    TrackEvent,
    Trajectory,
    first_zone_containing,
)
from .utils import config_from_mapping

logger = logging.getLogger(__name__)

FUSION_LOG_COLUMNS = (
    'recipient_id', 'donor_id', 'start_zone', 'lost_zone', 'found_zone', 'gap', 'cv_before', 'cv_after'
)

# Interpolated observations closer than this to the re-appearance are not generated
_TIME_EPSILON = 1e-9

_APPEAR = 0
_LOSE = 1


@dataclass(frozen=True)
class RepairConfig:
    interpolate: bool = False
    frame_rate: Optional[float] = None  # None: estimated from the observation intervals

    def __post_init__(self):
        if self.frame_rate is not None and not self.frame_rate > 0:
            raise ConfigError(f"repair.frame_rate must be positive, got {self.frame_rate!r}")

    @classmethod
    def from_mapping(cls, mapping):
        return config_from_mapping(cls, mapping, section="repair")


@dataclass(frozen=True)
class LostTrackState:
    trajectory: Trajectory
    start_zone: int
    lost_zone: int
    t_lost: float

    def __post_init__(self):
        assert self.trajectory.is_pending_lost


@dataclass(frozen=True)
class RepairResult:
    fused: Trajectory
    donor_id: str
    recipient_id: str
    triplet: object  # triplets.ZoneTriplet
    gap: float
    cv_before: float
    cv_after: float

    @property
    def improved(self):
        return self.cv_after > self.cv_before


@dataclass(frozen=True)
class RepairSummary:
    fusions: int
    improved: int


@dataclass(frozen=True)
class RepairBatch:
    trajectories: List[Trajectory]
    results: List[RepairResult]
    summary: RepairSummary


def lost_track_state(trajectory, scene):
    """
    Build the lost-pool entry of a trajectory.

    Returns None if the trajectory is not pending lost, or if it did not start in an entry or
    IO zone, or was not lost inside a lost or lost-found zone (no triplet can match it then).
    """
    event = trajectory.pending_lost_event
    if event is None:
        return None

    start = first_zone_containing(scene, trajectory.first.position, ENTRY_KINDS)
    lost = first_zone_containing(scene, event.position, LOST_KINDS)
    if start is None or lost is None:
        return None

    return LostTrackState(trajectory, start.ident, lost.ident, event.t)


def detect_anomalous_appearance(trajectory, scene):
    """
    Check whether a new track appears in a found or lost-found zone rather than in an entry or
    IO zone.

    Parameters
    ----------
    trajectory : Trajectory
        The newly appeared track.
    scene : SceneModel
        Scene with the manual and the learned zones.

    Returns
    -------
    found_zone : int or None
        Ident of the (lowest-ident) found or lost-found zone containing the first observation;
        None for appearances in entry or IO zones and in open space.
    """
    position = trajectory.first.position
    if first_zone_containing(scene, position, ENTRY_KINDS) is not None:
        return None

    zone = first_zone_containing(scene, position, FOUND_KINDS)
    return zone.ident if zone is not None else None


def _estimate_frame_rate(*trajectories):
    for trajectory in trajectories:
        times = [obs.t for obs in trajectory.observations if not obs.interpolated]
        if len(times) > 1:
            return 1.0 / float(np.median(np.diff(times)))
    return None


def _gap_observations(before, after, frame_rate):
    start = before.t
    end = after.t
    count = int(np.floor((end - start - _TIME_EPSILON) * frame_rate))

    observations = []
    for step in range(1, count + 1):
        t = start + step / frame_rate
        if t >= end - _TIME_EPSILON:
            break
        alpha = (t - start) / (end - start)

        def lerp(a, b):
            return a + alpha * (b - a)

        observations.append(
            Observation(
                t=t,
                frame=int(round(lerp(before.frame, after.frame))),
                position=GroundPoint(
                    lerp(before.position.x, after.position.x),
                    lerp(before.position.y, after.position.y),
                    lerp(before.position.z, after.position.z),
                ),
                width=lerp(before.width, after.width),
                height=lerp(before.height, after.height),
                depth=lerp(before.depth, after.depth),
                class_label=before.class_label,
                interpolated=True,
            ))
    return observations


def fuse(lost, new, t_now, interpolate=False, frame_rate=None):
    """
    Fuse a lost trajectory with the track that re-appeared.

    The fused trajectory keeps the id of the lost trajectory, and consists of its observations
    followed by those of the new track. Its events are those of the lost trajectory (without the
    Ended event), a Found event at the re-appearance, then the remaining events of the new track.

    Parameters
    ----------
    lost : Trajectory
        The lost trajectory (pending lost).
    new : Trajectory
        The re-appeared track; its first observation is at `t_now`.
    t_now : float
        Re-appearance time.
    interpolate : bool, optional
        Fill the gap with linearly interpolated observations (flagged as interpolated).
    frame_rate : float, optional
        Frame rate for interpolation; estimated from the observation intervals if not given.

    Returns
    -------
    fused : Trajectory
        The fused trajectory.
    """
    assert lost.last.t < t_now

    first_event = new.events[0]
    found = TrackEvent(EventKind.FOUND, t_now, new.first.position, first_event.neighbor_count)

    events = [event for event in lost.events if event.kind != EventKind.ENDED]
    events.append(found)
    events.extend(new.events[1:])

    gap = []
    if interpolate:
        frame_rate = frame_rate or _estimate_frame_rate(lost, new)
        if frame_rate:
            gap = _gap_observations(lost.last, new.first, frame_rate)

    return Trajectory(lost.id, lost.observations + tuple(gap) + new.observations, events)


def match_and_repair(new, found_zone, pool, triplets, t_now, scorer, interpolate=False, frame_rate=None):
    """
    Match a new track against the lost pool through the zone triplets, and fuse on success.

    Triplets ending in `found_zone` are scanned in priority order. For each, the eligible lost
    states are those with the triplet's start and lost zones, whose last observation precedes
    `t_now`, and whose loss lies strictly within the triplet's time window before `t_now`. The
    earliest lost of them is fused, and removed from the pool.

    Parameters
    ----------
    new : Trajectory
        The anomalously appeared track.
    found_zone : int
        Ident of the found zone the track appeared in.
    pool : list of LostTrackState
        The lost pool; modified in place.
    triplets : list of ZoneTriplet
        Triplets ordered by priority.
    t_now : float
        Time of the new track's first observation.
    scorer : ConfidenceScorer
        Scorer for the before/after confidence values.
    interpolate : bool, optional
        Fill the fusion gap with interpolated observations.
    frame_rate : float, optional
        Frame rate used for interpolation.

    Returns
    -------
    result : RepairResult or None
        The fusion, or None if no lost trajectory matches.
    """
    for triplet in triplets:
        if triplet.found_zone != found_zone:
            continue

        candidates = [
            (state.t_lost, index, state) for index, state in enumerate(pool)
            if state.start_zone == triplet.start_zone and state.lost_zone == triplet.lost_zone
            and state.trajectory.last.t < t_now and triplet.admits(t_now - state.t_lost)
        ]
        if not candidates:
            continue

        _, index, state = min(candidates, key=lambda candidate: candidate[:2])
        del pool[index]

        fused = fuse(state.trajectory, new, t_now, interpolate, frame_rate)
        result = RepairResult(
            fused=fused,
            donor_id=new.id,
            recipient_id=state.trajectory.id,
            triplet=triplet,
            gap=t_now - state.t_lost,
            cv_before=scorer.score(state.trajectory),
            cv_after=scorer.score(fused),
        )
        logger.debug("Fused %r into %r via triplet %s (gap %.3f s, CV %.3f -> %.3f)", result.donor_id,
                     result.recipient_id, triplet.key, result.gap, result.cv_before, result.cv_after)
        return result

    return None


def repair_batch(trajectories, scene, triplets, scorer, interpolate=False, frame_rate=None):
    """
    Repair a batch of trajectories by replaying them in time order.

    A trajectory enters the lost pool at its final Lost event that is not followed by a Found
    event; every new track is checked for an abnormal appearance and matched against the pool.
    A fused trajectory can be lost and repaired again later in the same batch.

    Parameters
    ----------
    trajectories : list of Trajectory
        Trajectories to repair; ids must be unique.
    scene : SceneModel
        Scene with the manual and the learned zones.
    triplets : list of ZoneTriplet
        Triplets ordered by priority.
    scorer : ConfidenceScorer
        Scorer for the before/after confidence values.
    interpolate : bool, optional
        Fill fusion gaps with interpolated observations.
    frame_rate : float, optional
        Frame rate used for interpolation.

    Returns
    -------
    batch : RepairBatch
        Repaired trajectories (input order, fused donors removed), fusion results and summary.
    """
    ids = [trajectory.id for trajectory in trajectories]
    if len(set(ids)) != len(ids):
        raise TrajectoryFileError("Trajectory ids must be unique within a batch")

    start_time = time.time()

    # (time, kind, index); appearances go before losses at equal times
    timeline = []
    for index, trajectory in enumerate(trajectories):
        timeline.append((trajectory.first.t, _APPEAR, index))
        pending = trajectory.pending_lost_event
        if pending is not None:
            timeline.append((pending.t, _LOSE, index))
    timeline.sort()

    current = {trajectory.id: trajectory for trajectory in trajectories}
    fused_into = {}  # donor id -> recipient id
    pool = []
    results = []

    def resolve(trajectory_id):
        while trajectory_id in fused_into:
            trajectory_id = fused_into[trajectory_id]
        return trajectory_id

    for t, kind, index in timeline:
        trajectory = trajectories[index]

        if kind == _LOSE:
            owner = current[resolve(trajectory.id)]
            state = lost_track_state(owner, scene)
            if state is not None:
                pool.append(state)
            continue

        found_zone = detect_anomalous_appearance(trajectory, scene)
        if found_zone is None:
            continue

        result = match_and_repair(trajectory, found_zone, pool, triplets, t, scorer, interpolate, frame_rate)
        if result is None:
            continue

        current[result.recipient_id] = result.fused
        fused_into[trajectory.id] = result.recipient_id
        results.append(result)

    repaired = [current[trajectory.id] for trajectory in trajectories if trajectory.id not in fused_into]
    summary = RepairSummary(fusions=len(results), improved=sum(1 for result in results if result.improved))

    assert len(repaired) == len(trajectories) - summary.fusions
    assert sum(t.observation_count() for t in repaired) == sum(t.observation_count() for t in trajectories)

    logger.info("Repair: %d fusion(s), %d with increased confidence, in %.2f seconds", summary.fusions,
                summary.improved, time.time() - start_time)

    return RepairBatch(trajectories=repaired, results=results, summary=summary)


def save_fusion_log(filename, results):
    """Write one CSV row per fusion."""
    with open(filename, 'w', encoding='utf-8', newline='') as fp:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(FUSION_LOG_COLUMNS)
        for result in results:
            writer.writerow([
                result.recipient_id,
                result.donor_id,
                result.triplet.start_zone,
                result.triplet.lost_zone,
                result.triplet.found_zone,
                repr(float(result.gap)),
                repr(float(result.cv_before)),
                repr(float(result.cv_after)),
            ])


def load_fusion_log(filename):
    """
    Read a fusion log written by save_fusion_log().

    Returns
    -------
    rows : list of dict
        One dict per fusion, with the recipient and donor ids as strings, zone idents as int and
        gap and confidence values as float.
    """
    rows = []
    with open(filename, 'r', encoding='utf-8', newline='') as fp:
        reader = csv.DictReader(fp)
        if tuple(reader.fieldnames or ()) != FUSION_LOG_COLUMNS:
            raise TrajectoryFileError(f"Expected header {','.join(FUSION_LOG_COLUMNS)}", source=filename, line=1)
        for line, row in enumerate(reader, start=2):
            try:
                rows.append({
                    'recipient_id': row['recipient_id'],
                    'donor_id': row['donor_id'],
                    'start_zone': int(row['start_zone']),
                    'lost_zone': int(row['lost_zone']),
                    'found_zone': int(row['found_zone']),
                    'gap': float(row['gap']),
                    'cv_before': float(row['cv_before']),
                    'cv_after': float(row['cv_after']),
                })
            except (TypeError, ValueError):
                raise TrajectoryFileError("Malformed fusion log row", source=filename, line=line) from None
    return rows
