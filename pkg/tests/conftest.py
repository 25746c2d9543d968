import pytest

from trajectory_repair_toolkit.features import FeatureConfig
from trajectory_repair_toolkit.model import (
    ClassLabel,
    EventKind,
    GroundPoint,
    Observation,
    SceneModel,
    TrackEvent,
    Trajectory,
    Zone,
    ZoneKind,
    rectangle_outline,
)
from trajectory_repair_toolkit.synthetic import SynthConfig, generate

# Zone descriptions as found in the original scene files
ENTRY_ZONE_TEXT = """\
<Zone ident = "9" name = "ZoneIOLeftTop" plane_name = "ground">
  <Properties_list>
    <Property name = "In_out_zone:Entry"/>
  </Properties_list>
  <Outline_list>
    <Point x="-830.0" y="-350.0" z = "0"/>
    <Point x="-300.0" y="-350.0" z = "0"/>
    <Point x="-300.0" y="-100.0" z = "0"/>
    <Point x="-830.0" y="-100.0" z = "0"/>
  </Outline_list>
</Zone>
"""

LOST_FOUND_ZONE_TEXT = """\
<Zone ident = "2" name = "ZoneLearning0" plane_name = "ground">
  <Properties_list>
    <Property name = "Lost_found_zone:Yes"/>
  </Properties_list>
  <Outline_list>
    <Point x="-2046.000000" y = "12.000000" z="0" />
    <Point x="-2046.000000" y = "778.000000" z="0" />
    <Point x="-1402.000000" y = "778.000000" z="0" />
    <Point x="-1402.000000" y = "12.000000" z="0" />
  </Outline_list>
</Zone>
"""


@pytest.fixture
def entry_zone_text():
    return ENTRY_ZONE_TEXT


@pytest.fixture
def lost_found_zone_text():
    return LOST_FOUND_ZONE_TEXT


@pytest.fixture
def corridor_scene():
    """
    Corridor along the x axis, 10 units wide:

        entry [0, 2]  lost [4, 6]  found [8, 10]  exit [18, 20]
    """
    return SceneModel(zones=(
        Zone(1, "ZoneEntry", ZoneKind.ENTRY, rectangle_outline(0.0, 0.0, 2.0, 10.0)),
        Zone(2, "ZoneExit", ZoneKind.EXIT, rectangle_outline(18.0, 0.0, 20.0, 10.0)),
        Zone(3, "ZoneLearning0", ZoneKind.LOST, rectangle_outline(4.0, 0.0, 6.0, 10.0)),
        Zone(4, "ZoneLearning1", ZoneKind.FOUND, rectangle_outline(8.0, 0.0, 10.0, 10.0)),
    ))


@pytest.fixture
def make_trajectory():
    """
    Factory for hand-made trajectories.

    Observations are given as (t, x, y) tuples. `lost_at` and `found_at` are observation
    indices that carry a Lost or Found event; `ended` adds an Ended event at the last
    observation.
    """

    def _make(trajectory_id, samples, lost_at=(), found_at=(), ended=True, label=ClassLabel.PERSON,
              dimensions=(0.5, 1.7, 0.3), neighbor_count=0):
        observations = [
            Observation(
                t=float(t),
                frame=int(round(t * 10)),
                position=GroundPoint(float(x), float(y)),
                width=dimensions[0],
                height=dimensions[1],
                depth=dimensions[2],
                class_label=label,
            ) for t, x, y in samples
        ]

        events = [TrackEvent(EventKind.FIRST_DETECTED, observations[0].t, observations[0].position, neighbor_count)]
        markers = sorted([(index, EventKind.LOST) for index in lost_at] + [(index, EventKind.FOUND)
                                                                            for index in found_at])
        for index, kind in markers:
            events.append(TrackEvent(kind, observations[index].t, observations[index].position, neighbor_count))
        if ended:
            events.append(TrackEvent(EventKind.ENDED, observations[-1].t, observations[-1].position, neighbor_count))

        return Trajectory(trajectory_id, observations, events)

    return _make


@pytest.fixture(scope="session")
def small_synthetic_dataset():
    config = SynthConfig(agent_count=40, spawn_interval=4.0, noise_track_rate=0.25, rng_seed=7)
    return generate(config, feature_config=FeatureConfig())


@pytest.fixture(scope="session")
def sparse_synthetic_dataset():
    # Agents far enough apart in time to make every association unambiguous
    config = SynthConfig(agent_count=200, spawn_interval=5.0, noise_track_rate=0.0, p_loss=0.5, rng_seed=11)
    return generate(config, feature_config=FeatureConfig())
