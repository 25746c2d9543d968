"""
Zone triplets: where complete trajectories start, where they pass a lost zone, and where they
are found again, with the typical time it takes.

A triplet (start zone, lost zone, found zone, minimum time, maximum time) is built from all
complete trajectories passing through the same three zones. For every trajectory, the minimum
time is the difference between entering the found zone and exiting the lost zone, and the
maximum time the difference between leaving the found zone and entering the lost zone. Triplets
are prioritized by the number of contributing trajectories.
"""
import csv
import io
import logging
import math
from collections import OrderedDict
from dataclasses import dataclass

from .exceptions import ConfigError, TripletFileError, ValidationError
from .model import ENTRY_KINDS, FOUND_KINDS, LOST_KINDS, contains_point, first_zone_containing
from .utils import config_from_mapping

logger = logging.getLogger(__name__)

TRIPLET_COLUMNS = ('start_zone', 'lost_zone', 'found_zone', 'min_time', 'max_time', 'support')

WINDOW_MEAN = "mean"
WINDOW_MINMAX = "minmax"
WINDOW_MODES = (WINDOW_MEAN, WINDOW_MINMAX)


@dataclass(frozen=True)
class TripletConfig:
    window: str = WINDOW_MEAN

    def __post_init__(self):
        if self.window not in WINDOW_MODES:
            raise ConfigError(f"triplets.window must be one of {', '.join(WINDOW_MODES)}, got {self.window!r}")

    @classmethod
    def from_mapping(cls, mapping):
        return config_from_mapping(cls, mapping, section="triplets")


@dataclass(frozen=True)
class ZoneTriplet:
    start_zone: int
    lost_zone: int
    found_zone: int
    min_time: float
    max_time: float
    support: int

    def __post_init__(self):
        if not 0 <= self.min_time <= self.max_time:
            raise ValidationError(f"Invalid triplet time window [{self.min_time}, {self.max_time}]")
        if self.support < 1:
            raise ValidationError(f"Triplet support must be at least 1, got {self.support}")

    @property
    def key(self):
        return self.start_zone, self.lost_zone, self.found_zone

    def admits(self, gap):
        """Check whether a lost-to-now interval lies strictly inside the time window."""
        return self.min_time < gap < self.max_time


@dataclass(frozen=True)
class TracedPassage:
    """Passage of one complete trajectory through a start, a lost and a found zone."""
    trajectory_id: str
    start_zone: int
    lost_zone: int
    found_zone: int
    t_enter_lost: float
    t_exit_lost: float
    t_enter_found: float
    t_leave_found: float

    @property
    def key(self):
        return self.start_zone, self.lost_zone, self.found_zone

    @property
    def min_time(self):
        return self.t_enter_found - self.t_exit_lost

    @property
    def max_time(self):
        return self.t_leave_found - self.t_enter_lost


def is_complete(trajectory, cv, scene, complete_threshold=0.8):
    """
    Check whether a trajectory is complete: its confidence value exceeds the threshold and it
    starts from an entry or IO zone.
    """
    if not cv > complete_threshold:
        return False
    return first_zone_containing(scene, trajectory.first.position, ENTRY_KINDS) is not None


def trace_triplet(trajectory, scene):
    """
    Trace the start, lost and found zones along a trajectory.

    The lost zone is the first lost or lost-found zone entered along the observations; the
    found zone is the first found or lost-found zone entered (outside-to-inside transition) at or
    after the first observation outside the lost zone.

    Parameters
    ----------
    trajectory : Trajectory
        A complete trajectory.
    scene : SceneModel
        Scene with the manual and the learned zones.

    Returns
    -------
    passage : TracedPassage or None
        The traced passage, or None if the trajectory does not start in an entry or IO zone,
        never enters a lost zone, never leaves it, or never enters a found zone afterwards.
    """
    observations = trajectory.observations

    start = first_zone_containing(scene, observations[0].position, ENTRY_KINDS)
    if start is None:
        return None

    lost = None
    enter_index = None
    for index, obs in enumerate(observations):
        lost = first_zone_containing(scene, obs.position, LOST_KINDS)
        if lost is not None:
            enter_index = index
            break
    if lost is None:
        return None

    exit_index = next(
        (index for index in range(enter_index + 1, len(observations))
         if not contains_point(lost, observations[index].position)),
        None,
    )
    if exit_index is None:
        return None

    found_zones = scene.zones_of_kind(FOUND_KINDS)
    found = None
    found_index = None
    for index in range(exit_index, len(observations)):
        previous = observations[index - 1].position
        current = observations[index].position
        for zone in found_zones:  # ident order
            if contains_point(zone, current) and not contains_point(zone, previous):
                found = zone
                found_index = index
                break
        if found is not None:
            break
    if found is None:
        return None

    leave_index = next(
        (index for index in range(found_index + 1, len(observations))
         if not contains_point(found, observations[index].position)),
        len(observations) - 1,
    )

    return TracedPassage(
        trajectory_id=trajectory.id,
        start_zone=start.ident,
        lost_zone=lost.ident,
        found_zone=found.ident,
        t_enter_lost=observations[enter_index].t,
        t_exit_lost=observations[exit_index].t,
        t_enter_found=observations[found_index].t,
        t_leave_found=observations[leave_index].t,
    )


def build_triplets(passages, window=WINDOW_MEAN):
    """
    Build prioritized zone triplets from traced passages.

    Parameters
    ----------
    passages : iterable of TracedPassage
        Passages of complete trajectories.
    window : str, optional
        "mean": the time window is the mean of the per-trajectory minimum and maximum times;
        "minmax": it spans the smallest minimum time to the largest maximum time.

    Returns
    -------
    triplets : list of ZoneTriplet
        Triplets ordered by support (descending), then by zone idents (ascending).
    """
    if window not in WINDOW_MODES:
        raise ValueError(f"Unknown triplet window mode {window!r}")

    groups = OrderedDict()
    for passage in passages:
        groups.setdefault(passage.key, []).append(passage)

    triplets = []
    for (start_zone, lost_zone, found_zone), members in groups.items():
        min_times = [passage.min_time for passage in members]
        max_times = [passage.max_time for passage in members]

        if window == WINDOW_MEAN:
            min_time = math.fsum(min_times) / len(members)
            max_time = math.fsum(max_times) / len(members)
        else:
            min_time = min(min_times)
            max_time = max(max_times)

        triplets.append(ZoneTriplet(start_zone, lost_zone, found_zone, min_time, max_time, len(members)))

    triplets.sort(key=lambda triplet: (-triplet.support, triplet.key))
    return triplets


def build_scene_triplets(trajectories, cvs, scene, complete_threshold=0.8, window=WINDOW_MEAN):
    """
    Select the complete trajectories, trace them, and build the scene's triplets.

    Parameters
    ----------
    trajectories : list of Trajectory
        Candidate trajectories.
    cvs : list of float
        Confidence values of the trajectories, in the same order.
    scene : SceneModel
        Scene with the manual and the learned zones.
    complete_threshold : float, optional
        Confidence threshold of complete trajectories.
    window : str, optional
        Time-window mode, see build_triplets().

    Returns
    -------
    triplets : list of ZoneTriplet
        Prioritized triplets.
    """
    assert len(trajectories) == len(cvs)

    complete = [
        trajectory for trajectory, cv in zip(trajectories, cvs)
        if is_complete(trajectory, cv, scene, complete_threshold)
    ]
    passages = [passage for passage in (trace_triplet(trajectory, scene) for trajectory in complete) if passage]
    triplets = build_triplets(passages, window)

    logger.info("Triplets: %d complete trajectories, %d traced passage(s), %d triplet(s)", len(complete),
                len(passages), len(triplets))
    return triplets


def write_triplets(triplets):
    output = io.StringIO()
    writer = csv.writer(output, lineterminator="\n")
    writer.writerow(TRIPLET_COLUMNS)
    for triplet in triplets:
        writer.writerow([
            triplet.start_zone,
            triplet.lost_zone,
            triplet.found_zone,
            repr(float(triplet.min_time)),
            repr(float(triplet.max_time)),
            triplet.support,
        ])
    return output.getvalue()


def read_triplets(text):
    """Parse a triplet table; the priority order of the rows is preserved."""
    reader = csv.reader(io.StringIO(text))

    header = None
    triplets = []
    for row in reader:
        line = reader.line_num
        if not row or row[0].lstrip().startswith("#"):
            continue
        if header is None:
            header = tuple(cell.strip() for cell in row)
            if header != TRIPLET_COLUMNS:
                raise TripletFileError(f"Expected header {','.join(TRIPLET_COLUMNS)}", line=line)
            continue

        if len(row) != len(TRIPLET_COLUMNS):
            raise TripletFileError(f"Expected {len(TRIPLET_COLUMNS)} fields, got {len(row)}", line=line)
        try:
            start_zone, lost_zone, found_zone, support = (int(row[i]) for i in (0, 1, 2, 5))
            triplets.append(ZoneTriplet(start_zone, lost_zone, found_zone, float(row[3]), float(row[4]), support))
        except ValidationError as e:
            raise TripletFileError(e.message, line=line) from None
        except ValueError as e:
            raise TripletFileError(f"Invalid triplet: {e}", line=line) from None

    return triplets


def save_triplets(filename, triplets):
    with open(filename, 'w', encoding='utf-8', newline='') as fp:
        fp.write(write_triplets(triplets))


def load_triplets(filename):
    with open(filename, 'r', encoding='utf-8', newline='') as fp:
        text = fp.read()

    try:
        return read_triplets(text)
    except ValidationError as e:
        raise e.with_source(filename)
