import csv
import json
import os

import pytest

from trajectory_repair_toolkit.__main__ import PIPELINE_FILES, main as toolkit_main
from trajectory_repair_toolkit.evaluation import csv_twin_filename

SMALL_RUN_CONFIG = """\
[run]
seed = 17

[ga]
population_size = 40
elite_count = 4

[zones]
kmax = 2
min_margin = 0.25

[synth]
agent_count = 30
spawn_interval = 5.0
noise_track_rate = 0.1
"""


@pytest.fixture(scope="module")
def cli_workdir(tmp_path_factory):
    """Working directory with a run configuration, synthetic trajectories and learned weights."""
    workdir = str(tmp_path_factory.mktemp("cli"))
    files = {key: os.path.join(workdir, name) for key, name in PIPELINE_FILES.items()}
    files['config'] = os.path.join(workdir, "run.toml")
    with open(files['config'], "w") as fp:
        fp.write(SMALL_RUN_CONFIG)

    exit_code = toolkit_main([
        "simulate",
        "--config", files['config'],
        "--out", files['trajectories'],
        "--truth", files['truth'],
        "--scene", files['scene'],
    ])  # yapf: disable
    assert exit_code == 0

    exit_code = toolkit_main([
        "learn-weights",
        "--config", files['config'],
        "--train", files['trajectories'],
        "--gt", files['truth'],
        "--scene", files['scene'],
        "--max-generations", "3",
        "--out", files['weights'],
    ])  # yapf: disable
    assert exit_code == 0

    return files


def test_invalid_command_lines():
    assert toolkit_main([]) == 2
    assert toolkit_main(["bogus"]) == 2
    assert toolkit_main(["score", "--no-such-flag"]) == 2


def test_missing_input_path():
    assert toolkit_main(["score", "--scene", "scene.xml", "--weights", "weights.json"]) == 1


def test_simulate_output(cli_workdir, capsys):
    exit_code = toolkit_main([
        "sim",
        "--config", cli_workdir['config'],
        "--out", cli_workdir['trajectories'],
    ])  # yapf: disable
    assert exit_code == 0

    stdout, _ = capsys.readouterr()
    assert stdout.startswith("Generated ")
    assert "split(s)" in stdout


def test_learned_weights(cli_workdir):
    with open(cli_workdir['weights'], "r") as fp:
        document = json.load(fp)
    assert sum(document['weights'].values()) == pytest.approx(1.0)
    assert document['training']['method'] == "genetic"
    assert document['training']['generations'] <= 3


def test_score(cli_workdir, tmpdir, capsys):
    kept_file = os.path.join(tmpdir, "kept.csv")
    exit_code = toolkit_main([
        "score",
        "--trajectories", cli_workdir['trajectories'],
        "--scene", cli_workdir['scene'],
        "--weights", cli_workdir['weights'],
        "--out", cli_workdir['scores'],
        "--kept", kept_file,
    ])  # yapf: disable
    assert exit_code == 0
    assert os.path.isfile(kept_file)

    stdout, _ = capsys.readouterr()
    assert stdout.startswith("Scored ")
    assert "complete" in stdout and "noise" in stdout


def test_score_rejects_invalid_weights(cli_workdir, tmpdir):
    with open(cli_workdir['weights'], "r") as fp:
        document = json.load(fp)
    document['weights'] = {name: value / 2 for name, value in document['weights'].items()}

    weights_file = os.path.join(tmpdir, "half-weights.json")
    with open(weights_file, "w") as fp:
        json.dump(document, fp)

    exit_code = toolkit_main([
        "score",
        "--trajectories", cli_workdir['trajectories'],
        "--scene", cli_workdir['scene'],
        "--weights", weights_file,
    ])  # yapf: disable
    assert exit_code == 1


def test_stepwise_repair(cli_workdir, tmpdir, capsys):
    files = cli_workdir

    exit_code = toolkit_main([
        "learn-zones",
        "--config", files['config'],
        "--trajectories", files['trajectories'],
        "--scene", files['scene'],
        "--out", files['learned_zones'],
    ])  # yapf: disable
    assert exit_code == 0

    exit_code = toolkit_main([
        "build-triplets",
        "--trajectories", files['trajectories'],
        "--scene", files['learned_zones'],
        "--weights", files['weights'],
        "--out", files['triplets'],
    ])  # yapf: disable
    assert exit_code == 0

    exit_code = toolkit_main([
        "repair",
        "--trajectories", files['trajectories'],
        "--scene", files['learned_zones'],
        "--triplets", files['triplets'],
        "--weights", files['weights'],
        "--out", files['repaired'],
        "--fusions", files['fusions'],
        "--report", files['report'],
    ])  # yapf: disable
    assert exit_code == 0
    capsys.readouterr()

    report_file = os.path.join(tmpdir, "evaluation.txt")
    exit_code = toolkit_main([
        "evaluate",
        "--before", files['trajectories'],
        "--after", files['repaired'],
        "--fusions", files['fusions'],
        "--scene", files['learned_zones'],
        "--weights", files['weights'],
        "--out", report_file,
    ])  # yapf: disable
    assert exit_code == 0

    stdout, _ = capsys.readouterr()
    assert stdout.splitlines()[-1].startswith("Fusions: ")
    with open(files['report'], "r") as fp:
        repair_report = fp.read().splitlines()
    with open(report_file, "r") as fp:
        evaluation_report = fp.read().splitlines()
    assert evaluation_report[-1] == repair_report[-1]
    assert os.path.isfile(csv_twin_filename(report_file))


def _report_table(filename):
    with open(csv_twin_filename(filename), "r", newline="") as fp:
        return {row['class']: row for row in csv.DictReader(fp)}


@pytest.mark.slow
def test_pipeline_is_deterministic(tmpdir):
    config_file = os.path.join(tmpdir, "run.toml")
    with open(config_file, "w") as fp:
        fp.write(SMALL_RUN_CONFIG)

    workdirs = [os.path.join(tmpdir, "first"), os.path.join(tmpdir, "second")]
    for workdir in workdirs:
        assert toolkit_main(["pipeline", "--config", config_file, "--workdir", workdir]) == 0

    names = sorted(PIPELINE_FILES.values()) + ["report.csv"]
    for name in names:
        with open(os.path.join(workdirs[0], name), "rb") as fp:
            first = fp.read()
        with open(os.path.join(workdirs[1], name), "rb") as fp:
            second = fp.read()
        assert first == second, name

    # The trajectories lost to fusions are the fusions themselves
    table = _report_table(os.path.join(workdirs[0], PIPELINE_FILES['report']))
    fusions = int(table['Fusions']['with_number'])
    assert int(table['Total']['with_number']) == int(table['Total']['without_number']) - fusions


@pytest.mark.slow
def test_pipeline_with_seed_override(tmpdir):
    config_file = os.path.join(tmpdir, "run.toml")
    with open(config_file, "w") as fp:
        fp.write(SMALL_RUN_CONFIG)

    workdirs = [os.path.join(tmpdir, "seed-1"), os.path.join(tmpdir, "seed-2")]
    for seed, workdir in zip(("1", "2"), workdirs):
        assert toolkit_main(["p", "--config", config_file, "--workdir", workdir, "--seed", seed, "--uniform"]) == 0

    trajectories = []
    for workdir in workdirs:
        with open(os.path.join(workdir, PIPELINE_FILES['trajectories']), "r") as fp:
            trajectories.append(fp.read())
    assert trajectories[0] != trajectories[1]


@pytest.mark.slow
def test_demo_pipeline(tmpdir):
    config_file = os.path.join(os.path.dirname(__file__), "..", "demo", "demo.toml")
    workdir = os.path.join(tmpdir, "demo")
    assert toolkit_main(["pipeline", "--config", config_file, "--workdir", workdir, "--uniform"]) == 0

    table = _report_table(os.path.join(workdir, PIPELINE_FILES['report']))
    assert int(table['Total']['without_number']) > 80
    assert int(table['Fusions']['with_number']) > 0
