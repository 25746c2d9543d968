import os

import pytest

from trajectory_repair_toolkit.exceptions import ConfigError, TripletFileError, ValidationError
from trajectory_repair_toolkit.triplets import (
    TracedPassage,
    TripletConfig,
    ZoneTriplet,
    build_scene_triplets,
    build_triplets,
    is_complete,
    load_triplets,
    read_triplets,
    save_triplets,
    trace_triplet,
    write_triplets,
)

CORRIDOR_SAMPLES = [
    (80.0, 1.0, 5.0),  # entry
    (90.0, 5.0, 5.0),  # enters the lost zone
    (95.0, 5.5, 5.0),
    (100.0, 7.0, 5.0),  # leaves the lost zone
    (130.0, 9.0, 5.0),  # enters the found zone
    (140.0, 9.5, 5.0),
    (150.0, 11.0, 5.0),  # leaves the found zone
]


def _passage(trajectory_id, min_time, max_time, key=(1, 3, 4)):
    # t_exit_lost = 0 and t_enter_lost = 0 make min_time and max_time direct
    return TracedPassage(trajectory_id, *key, t_enter_lost=0.0, t_exit_lost=0.0, t_enter_found=min_time,
                         t_leave_found=max_time)


def test_trace_triplet(corridor_scene, make_trajectory):
    passage = trace_triplet(make_trajectory("1", CORRIDOR_SAMPLES), corridor_scene)
    assert passage.key == (1, 3, 4)
    assert passage.min_time == pytest.approx(30.0)
    assert passage.max_time == pytest.approx(60.0)


def test_trace_triplet_ending_in_found_zone(corridor_scene, make_trajectory):
    passage = trace_triplet(make_trajectory("1", CORRIDOR_SAMPLES[:-1]), corridor_scene)
    assert passage.max_time == pytest.approx(140.0 - 90.0)


@pytest.mark.parametrize("samples", [
    [(0.0, 12.0, 5.0), (10.0, 5.0, 5.0), (20.0, 9.0, 5.0)],  # does not start in an entry zone
    [(0.0, 1.0, 5.0), (10.0, 3.0, 5.0), (20.0, 19.0, 5.0)],  # never enters the lost zone
    [(0.0, 1.0, 5.0), (10.0, 4.5, 5.0), (20.0, 5.5, 5.0)],  # never leaves the lost zone
    [(0.0, 1.0, 5.0), (10.0, 5.0, 5.0), (20.0, 7.0, 5.0)],  # never enters the found zone
])
def test_trace_triplet_without_passage(corridor_scene, make_trajectory, samples):
    assert trace_triplet(make_trajectory("1", samples), corridor_scene) is None


def test_build_triplets_averages_windows():
    triplet, = build_triplets([_passage("a", 30.0, 60.0), _passage("b", 10.0, 80.0)])
    assert triplet.key == (1, 3, 4)
    assert (triplet.min_time, triplet.max_time) == (20.0, 70.0)
    assert triplet.support == 2

    triplet, = build_triplets([_passage("a", 30.0, 60.0), _passage("b", 10.0, 80.0)], window="minmax")
    assert (triplet.min_time, triplet.max_time) == (10.0, 80.0)


def test_build_triplets_priority_order():
    passages = [
        _passage("a", 1.0, 2.0, key=(2, 5, 6)),
        _passage("b", 1.0, 2.0, key=(1, 5, 6)),
        _passage("c", 1.0, 2.0, key=(1, 3, 4)),
        _passage("d", 1.0, 2.0, key=(1, 3, 4)),
    ]
    assert [triplet.key for triplet in build_triplets(passages)] == [(1, 3, 4), (1, 5, 6), (2, 5, 6)]
    assert build_triplets([]) == []

    with pytest.raises(ValueError):
        build_triplets(passages, window="median")


def test_is_complete(corridor_scene, make_trajectory):
    trajectory = make_trajectory("1", CORRIDOR_SAMPLES)
    assert is_complete(trajectory, 0.81, corridor_scene)
    assert not is_complete(trajectory, 0.8, corridor_scene)

    outsider = make_trajectory("2", [(0.0, 12.0, 5.0), (1.0, 13.0, 5.0)])
    assert not is_complete(outsider, 0.95, corridor_scene)


def test_build_scene_triplets(corridor_scene, make_trajectory):
    trajectories = [
        make_trajectory("1", CORRIDOR_SAMPLES),
        make_trajectory("2", [(t + 100.0, x, y) for t, x, y in CORRIDOR_SAMPLES]),
        make_trajectory("3", CORRIDOR_SAMPLES),
    ]
    triplet, = build_scene_triplets(trajectories, [0.9, 0.95, 0.5], corridor_scene)
    assert triplet.support == 2
    assert (triplet.min_time, triplet.max_time) == pytest.approx((30.0, 60.0))


def test_admits_is_strict():
    triplet = ZoneTriplet(1, 3, 4, 1.0, 10.0, 1)
    assert triplet.admits(5.0)
    assert not triplet.admits(1.0)
    assert not triplet.admits(10.0)


def test_invalid_triplets():
    with pytest.raises(ValidationError):
        ZoneTriplet(1, 3, 4, 10.0, 1.0, 1)
    with pytest.raises(ValidationError):
        ZoneTriplet(1, 3, 4, 1.0, 10.0, 0)
    with pytest.raises(ConfigError):
        TripletConfig(window="median")


def test_write_and_read_triplets():
    triplets = [ZoneTriplet(1, 3, 4, 0.5, 4.25, 12), ZoneTriplet(2, 3, 5, 1.0, 2.0, 3)]
    text = write_triplets(triplets)
    assert text.splitlines()[0] == "start_zone,lost_zone,found_zone,min_time,max_time,support"
    assert read_triplets(text) == triplets


def test_read_triplets_errors():
    with pytest.raises(TripletFileError) as excinfo:
        read_triplets("start,lost,found\n")
    assert excinfo.value.line == 1

    text = "start_zone,lost_zone,found_zone,min_time,max_time,support\n1,3,4,0.5,4.0,2\n1,3,x,0.5,4.0,2\n"
    with pytest.raises(TripletFileError) as excinfo:
        read_triplets(text)
    assert excinfo.value.line == 3

    text = "start_zone,lost_zone,found_zone,min_time,max_time,support\n1,3,4,5.0,4.0,2\n"
    with pytest.raises(TripletFileError) as excinfo:
        read_triplets(text)
    assert excinfo.value.line == 2


def test_load_triplets_error_names_the_file(tmpdir):
    filename = os.path.join(tmpdir, "triplets.csv")
    with open(filename, "w") as fp:
        fp.write("start_zone,lost_zone,found_zone,min_time,max_time,support\n1,3,4,0.5,4.0\n")

    with pytest.raises(TripletFileError) as excinfo:
        load_triplets(filename)
    assert str(excinfo.value).startswith(f"{filename}:2:")


def test_save_and_load_triplets(tmpdir):
    filename = os.path.join(tmpdir, "triplets.csv")
    triplets = [ZoneTriplet(1, 3, 4, 0.125, 4.5, 7)]
    save_triplets(filename, triplets)
    assert load_triplets(filename) == triplets
