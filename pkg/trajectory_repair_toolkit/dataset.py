"""
Reading and writing of trajectory record files and ground-truth files.

A trajectory file is UTF-8 CSV with a mandatory header and one record per observation:

    trajectory_id,frame,t,x,y,z,width,height,depth,class_label,event,neighbor_count,interpolated

The event column holds one of none|first|lost|found|end (several flags can be joined with '+').
The neighbor_count and interpolated columns may be omitted. The interpolated column (0 or 1)
marks gap-filling observations inserted by repair; when absent, all observations are real.
Lines starting with '#' are comments.
"""
import csv
import io
from collections import OrderedDict

from .exceptions import TrajectoryFileError, ValidationError
from .model import ClassLabel, EventKind, GroundPoint, Observation, TrackEvent, Trajectory

TRAJECTORY_COLUMNS = (
    'trajectory_id', 'frame', 't', 'x', 'y', 'z', 'width', 'height', 'depth', 'class_label', 'event',
    'neighbor_count', 'interpolated'
)
REQUIRED_COLUMNS = TRAJECTORY_COLUMNS[:-2]

NO_EVENT = "none"
EVENT_SEPARATOR = "+"

TRUTH_COLUMNS = ('trajectory_id', 'agent_id', 'gt_class', 'gt_value')


def _parse_flag(value):
    if value not in ("0", "1"):
        raise ValueError(f"interpolated flag must be 0 or 1, got {value!r}")
    return value == "1"


def _parse_record(row, columns, line):
    record = dict(zip(columns, (value.strip() for value in row)))
    try:
        interpolated = _parse_flag(record['interpolated']) if 'interpolated' in record else False
        obs = Observation(
            t=float(record['t']),
            frame=int(record['frame']),
            position=GroundPoint(float(record['x']), float(record['y']), float(record['z'] or 0)),
            width=float(record['width']),
            height=float(record['height']),
            depth=float(record['depth']),
            class_label=ClassLabel(record['class_label'].lower()),
            interpolated=interpolated,
        )
        flags = [] if record['event'] in ("", NO_EVENT) else record['event'].split(EVENT_SEPARATOR)
        kinds = [EventKind(flag.strip().lower()) for flag in flags]
        neighbor_count = int(record['neighbor_count']) if 'neighbor_count' in record else None
    except ValidationError as e:
        raise TrajectoryFileError(e.message, line=line) from None
    except ValueError as e:
        raise TrajectoryFileError(f"Invalid record: {e}", line=line) from None

    events = [TrackEvent(kind, obs.t, obs.position, neighbor_count) for kind in kinds]
    return record['trajectory_id'], obs, events


def read_trajectories(text):
    """
    Parse trajectory records.

    Parameters
    ----------
    text : str
        CSV text with header line.

    Returns
    -------
    trajectories : list of Trajectory
        Trajectories grouped by id, in order of first appearance in the file.

    Raises
    ------
    TrajectoryFileError
        On malformed records, non-monotonic timestamps within a trajectory, or a missing or
        repeated `first` event flag. The error names the offending trajectory and line.
    """
    reader = csv.reader(io.StringIO(text))

    columns = None
    groups = OrderedDict()  # id -> (observations, events, first line)

    for row in reader:
        line = reader.line_num
        if not row or not any(cell.strip() for cell in row) or row[0].lstrip().startswith("#"):
            continue

        if columns is None:
            columns = [cell.strip() for cell in row]
            missing = [name for name in REQUIRED_COLUMNS if name not in columns]
            if missing:
                raise TrajectoryFileError(f"Header is missing column(s): {', '.join(missing)}", line=line)
            continue

        if len(row) != len(columns):
            raise TrajectoryFileError(f"Expected {len(columns)} fields, got {len(row)}", line=line)

        trajectory_id, obs, events = _parse_record(row, columns, line)
        observations, trajectory_events, _ = groups.setdefault(trajectory_id, ([], [], line))

        if observations and obs.t <= observations[-1].t:
            raise TrajectoryFileError(f"Trajectory {trajectory_id!r}: timestamps are not increasing", line=line)

        observations.append(obs)
        trajectory_events.extend(events)

    trajectories = []
    for trajectory_id, (observations, events, line) in groups.items():
        first_count = sum(1 for event in events if event.kind == EventKind.FIRST_DETECTED)
        if first_count != 1:
            raise TrajectoryFileError(
                f"Trajectory {trajectory_id!r}: expected exactly one 'first' event flag, found {first_count}",
                line=line,
            )
        try:
            trajectories.append(Trajectory(trajectory_id, observations, events))
        except ValidationError as e:
            raise TrajectoryFileError(e.message, line=line) from None

    return trajectories


def _format_number(value):
    return repr(float(value))


def write_trajectories(trajectories, include_neighbor_counts=True):
    """
    Serialize trajectories into trajectory-record CSV text.

    Parameters
    ----------
    trajectories : iterable of Trajectory
        Trajectories to write; records are grouped per trajectory, in the given order.
    include_neighbor_counts : bool, optional
        Whether to write the neighbor_count column. The interpolated column is always written.

    Returns
    -------
    text : str
        CSV text, readable by read_trajectories().
    """
    columns = REQUIRED_COLUMNS + (('neighbor_count', ) if include_neighbor_counts else ()) + ('interpolated', )

    output = io.StringIO()
    writer = csv.writer(output, lineterminator="\n")
    writer.writerow(columns)

    for trajectory in trajectories:
        # Events are attached to the observation with the same timestamp
        events_by_time = {}
        for event in trajectory.events:
            events_by_time.setdefault(event.t, []).append(event)

        for obs in trajectory.observations:
            events = events_by_time.get(obs.t, [])
            flags = EVENT_SEPARATOR.join(event.kind.value for event in events) or NO_EVENT
            row = [
                trajectory.id,
                obs.frame,
                _format_number(obs.t),
                _format_number(obs.position.x),
                _format_number(obs.position.y),
                _format_number(obs.position.z),
                _format_number(obs.width),
                _format_number(obs.height),
                _format_number(obs.depth),
                obs.class_label.value,
                flags,
            ]
            if include_neighbor_counts:
                row.append(max((event.neighbor_count or 0 for event in events), default=0))
            row.append(int(obs.interpolated))
            writer.writerow(row)

    return output.getvalue()


def load_trajectories(filename):
    """
    Load trajectories from the specified trajectory-record file.

    Parameters
    ----------
    filename : str
        Name of the CSV file to load.

    Returns
    -------
    trajectories : list of Trajectory
        Trajectories in order of first appearance.
    """
    with open(filename, 'r', encoding='utf-8', newline='') as fp:
        text = fp.read()

    try:
        return read_trajectories(text)
    except ValidationError as e:
        raise e.with_source(filename)


def save_trajectories(filename, trajectories, include_neighbor_counts=True):
    """Write trajectories to the specified trajectory-record file."""
    with open(filename, 'w', encoding='utf-8', newline='') as fp:
        fp.write(write_trajectories(trajectories, include_neighbor_counts))


def has_neighbor_counts(trajectories):
    """Check whether all events carry neighbor counts (i.e., the source file had the column)."""
    return all(event.neighbor_count is not None for trajectory in trajectories for event in trajectory.events)


def load_ground_truth(filename):
    """
    Load per-trajectory ground truth.

    Parameters
    ----------
    filename : str
        Name of the CSV file with columns trajectory_id, agent_id, gt_class, gt_value.

    Returns
    -------
    truth : dict
        Mapping trajectory_id -> dict with keys 'agent_id' (str or None), 'gt_class' (str) and
        'gt_value' (float).
    """
    truth = {}
    with open(filename, 'r', encoding='utf-8', newline='') as fp:
        reader = csv.DictReader(row for row in fp if not row.lstrip().startswith("#"))
        missing = [name for name in ('trajectory_id', 'gt_value') if name not in (reader.fieldnames or [])]
        if missing:
            raise TrajectoryFileError(f"Ground-truth header is missing column(s): {', '.join(missing)}",
                                      source=filename, line=1)
        for index, row in enumerate(reader, start=2):
            try:
                value = float(row['gt_value'])
            except (TypeError, ValueError):
                raise TrajectoryFileError(f"Invalid gt_value {row['gt_value']!r}", source=filename, line=index)
            if not 0.0 <= value <= 1.0:
                raise TrajectoryFileError(f"gt_value {value} outside [0, 1]", source=filename, line=index)
            truth[row['trajectory_id']] = {
                'agent_id': row.get('agent_id') or None,
                'gt_class': row.get('gt_class', ''),
                'gt_value': value,
            }
    return truth


def save_ground_truth(filename, rows):
    """
    Write per-trajectory ground truth.

    Parameters
    ----------
    filename : str
        Output CSV file name.
    rows : iterable
        Iterable of (trajectory_id, agent_id or None, gt_class name, gt_value) tuples.
    """
    with open(filename, 'w', encoding='utf-8', newline='') as fp:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(TRUTH_COLUMNS)
        for trajectory_id, agent_id, gt_class, gt_value in rows:
            writer.writerow([trajectory_id, "" if agent_id is None else agent_id, gt_class, _format_number(gt_value)])
