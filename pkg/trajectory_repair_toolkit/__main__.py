import sys
import os
import argparse
import logging
import time
from dataclasses import replace

from .config import VERBOSITY_LEVELS, RunConfig, load_config
from .confidence import (
    ConfidenceScorer,
    WeightVector,
    classify,
    filter_noise,
    load_weights,
    save_scores,
    save_weights,
)
from .dataset import has_neighbor_counts, load_ground_truth, load_trajectories, save_ground_truth, save_trajectories
from .evaluation import csv_twin_filename, evaluate, save_report
from .exceptions import ConfigError, ToolkitError
from .features import compute_stats, estimate_neighbor_counts, extract_all
from .genetic import build_training_set, evolve
from .model import SceneModel
from .repair import load_fusion_log, repair_batch, save_fusion_log
from .synthetic import generate
from .triplets import WINDOW_MODES, build_scene_triplets, load_triplets, save_triplets
from .zone_file import load_zone_file, save_zone_file
from .zone_learning import learn_zones


DEFAULT_PIPELINE_WORKDIR = "pipeline-output"

# Output files of the pipeline command, within its working directory
PIPELINE_FILES = {
    'scene': "scene.xml",
    'trajectories': "trajectories.csv",
    'truth': "truth.csv",
    'weights': "weights.json",
    'learned_zones': "learned_zones.xml",
    'scores': "scores.csv",
    'triplets': "triplets.csv",
    'repaired': "repaired.csv",
    'fusions': "fusions.csv",
    'report': "report.txt",
}


def _run_config(args):
    config = load_config(args.config) if args.config else RunConfig()
    if args.seed is not None:
        config = config.with_seed(args.seed)

    # Config verbosity applies unless overridden on the command line
    if not args.verbose and not args.quiet:
        logging.getLogger().setLevel(VERBOSITY_LEVELS[config.verbosity])

    return config


def _path(args, config, attribute, key, flag, required=True):
    value = getattr(args, attribute, None) or config.path(key)
    if value is None and required:
        raise ConfigError(f"No {flag} given, neither on the command line nor in [paths] {key}")
    return value


def _load_scene(filename):
    return SceneModel(zones=load_zone_file(filename))


def _load_trajectories(filename, feature_config):
    trajectories = load_trajectories(filename)
    if not has_neighbor_counts(trajectories):
        logging.info("No neighbor counts in %r; estimating them from the trajectories...", filename)
        trajectories = estimate_neighbor_counts(trajectories, feature_config)
    return trajectories


def _load_scorer(scene, weights_file, config):
    weights, stats = load_weights(weights_file)
    return ConfidenceScorer(scene, weights, stats, config.features)


def _display_settings(args, settings):
    logging.info("")
    logging.info("Settings:")
    logging.info(" - mode: %r", args.command)
    for name, value in settings:
        logging.info(" - %s: %r", name, value)
    logging.info("")


def _display_class_summary(cvs):
    counts = {}
    for cv in cvs:
        label = classify(cv).label
        counts[label] = counts.get(label, 0) + 1
    summary = ", ".join(f"{label} {counts.get(label, 0)}" for label in ('complete', 'incomplete', 'unreliable', 'noise'))
    print(f"Scored {len(cvs)} trajectories: {summary}")


# *** Processing stages (shared by the individual commands and the pipeline) ***
def _stage_simulate(config, trajectories_file, truth_file, scene_file=None):
    logging.info("Generating synthetic trajectories...")
    start_time = time.time()
    dataset = generate(config.synth_config(), feature_config=config.features)
    logging.info("Generated %d trajectories in %.2f seconds.", len(dataset.trajectories), time.time() - start_time)

    save_trajectories(trajectories_file, dataset.trajectories)
    if truth_file:
        save_ground_truth(truth_file, dataset.truth_rows())
    if scene_file:
        save_zone_file(scene_file, dataset.scene.zones)

    return dataset


def _stage_learn_weights(trajectories, ground_truth, scene, config, weights_file, uniform=False):
    stats = compute_stats(extract_all(trajectories, scene, config.features))
    logging.info("Normalization statistics computed over %d trajectories.", stats.count)

    if uniform:
        logging.info("Using uniform weights.")
        weights = WeightVector.uniform()
        training_info = {'method': 'uniform'}
    else:
        ga_config = config.ga_config()
        train = build_training_set(trajectories, ground_truth, scene, stats, config.features, ga_config.train_size)
        logging.info("Learning weights on %d training trajectories (population %d, seed %d)...", len(train),
                     ga_config.population_size, ga_config.rng_seed)
        result = evolve(train, ga_config)
        weights = result.best
        training_info = {
            'method': 'genetic',
            'training_size': len(train),
            'fitness': result.best_fitness,
            'generations': result.generations,
            'converged': result.converged,
            'seed': ga_config.rng_seed,
        }

    logging.info("Saving weights to %r...", weights_file)
    save_weights(weights_file, weights, stats, training_info)
    return weights, stats


def _stage_score(trajectories, scorer, scores_file=None):
    cvs = scorer.score_all(trajectories)
    if scores_file:
        logging.info("Saving scores to %r...", scores_file)
        save_scores(scores_file, trajectories, cvs)
    return cvs


def _stage_learn_zones(trajectories, scene, config, zones_file):
    seed = config.stage_seed('zones')
    logging.info("Learning lost and found zones (kmax %d, seed %d)...", config.zones.kmax, seed)
    learned_scene = learn_zones(trajectories, scene, config.zones, seed)

    logging.info("Saving %d zone(s) to %r...", len(learned_scene.zones), zones_file)
    save_zone_file(zones_file, learned_scene.zones)
    return learned_scene


def _stage_build_triplets(trajectories, cvs, scene, config, triplets_file):
    triplets = build_scene_triplets(
        trajectories,
        cvs,
        scene,
        config.confidence.complete_threshold,
        config.triplets.window,
    )
    logging.info("Saving %d triplet(s) to %r...", len(triplets), triplets_file)
    save_triplets(triplets_file, triplets)
    return triplets


def _stage_repair(trajectories, scene, triplets, scorer, config, repaired_file, fusions_file=None):
    logging.info("Repairing %d trajectories with %d triplet(s)...", len(trajectories), len(triplets))
    batch = repair_batch(
        trajectories,
        scene,
        triplets,
        scorer,
        interpolate=config.repair.interpolate,
        frame_rate=config.repair.frame_rate,
    )
    logging.info("Saving repaired trajectories to %r...", repaired_file)
    save_trajectories(repaired_file, batch.trajectories)
    if fusions_file:
        logging.info("Saving fusion log to %r...", fusions_file)
        save_fusion_log(fusions_file, batch.results)
    return batch


def _stage_evaluate(before_cvs, after_cvs, fusions, improved, report_file=None):
    report = evaluate(before_cvs, after_cvs, fusions, improved)

    # Display the report to stdout
    print(report.render(), end="")

    if report_file:
        logging.info("")
        logging.info("Saving report to %r and %r...", report_file, csv_twin_filename(report_file))
        save_report(report_file, report)
    return report


# *** Command handlers ***
def cmd_simulate(args):
    """
    Command handler: simulate

    Generates synthetic trajectories with injected track splits, together with their ground truth.

    Parameters
    ----------
    args : argparse.Namespace
        argparse Namespace structure, obtained by argparse.ArgumentParser.parse_args().
    """
    config = _run_config(args)
    trajectories_file = _path(args, config, 'out', 'trajectories', "--out")
    truth_file = _path(args, config, 'truth', 'truth', "--truth", required=False)
    scene_file = _path(args, config, 'scene', 'scene', "--scene", required=False)

    _display_settings(args, [
        ("config file", args.config),
        ("seed", config.stage_seed('synth')),
        ("agents", config.synth.agent_count),
        ("loss probability", config.synth.p_loss),
        ("trajectories file", trajectories_file),
        ("ground-truth file", truth_file),
        ("scene file", scene_file),
    ])

    dataset = _stage_simulate(config, trajectories_file, truth_file, scene_file)
    print(f"Generated {len(dataset.trajectories)} trajectories with {len(dataset.splits)} split(s)")

    # Done
    logging.info("")
    logging.info("Done!")


def cmd_learn_weights(args):
    """
    Command handler: learn-weights

    Learns the feature weights with the genetic algorithm and stores them together with the
    normalization statistics.

    Parameters
    ----------
    args : argparse.Namespace
        argparse Namespace structure, obtained by argparse.ArgumentParser.parse_args().
    """
    config = _run_config(args)
    overrides = {}
    if args.pop is not None:
        overrides['population_size'] = args.pop
    if args.max_generations is not None:
        overrides['max_generations'] = args.max_generations
    if args.train_size is not None:
        overrides['train_size'] = args.train_size
    if overrides:
        config = replace(config, ga=replace(config.ga, **overrides))

    trajectories_file = _path(args, config, 'train', 'trajectories', "--train")
    truth_file = _path(args, config, 'gt', 'truth', "--gt", required=not args.uniform)
    scene_file = _path(args, config, 'scene', 'scene', "--scene")
    weights_file = _path(args, config, 'out', 'weights', "--out")

    _display_settings(args, [
        ("config file", args.config),
        ("training trajectories file", trajectories_file),
        ("ground-truth file", truth_file),
        ("scene file", scene_file),
        ("population size", config.ga.population_size),
        ("seed", config.stage_seed('ga')),
        ("uniform weights", args.uniform),
        ("weights file", weights_file),
    ])

    scene = _load_scene(scene_file)
    trajectories = _load_trajectories(trajectories_file, config.features)
    ground_truth = {}
    if truth_file:
        ground_truth = {key: entry['gt_value'] for key, entry in load_ground_truth(truth_file).items()}

    weights, _ = _stage_learn_weights(trajectories, ground_truth, scene, config, weights_file, args.uniform)
    print("Weights: " + " ".join(f"{value:.4f}" for value in weights.values))

    # Done
    logging.info("")
    logging.info("Done!")


def cmd_score(args):
    """
    Command handler: score

    Computes the confidence value and class of every trajectory, and optionally filters noise.

    Parameters
    ----------
    args : argparse.Namespace
        argparse Namespace structure, obtained by argparse.ArgumentParser.parse_args().
    """
    config = _run_config(args)
    if args.noise_threshold is not None:
        config = replace(config, confidence=replace(config.confidence, noise_threshold=args.noise_threshold))

    trajectories_file = _path(args, config, 'trajectories', 'trajectories', "--trajectories")
    scene_file = _path(args, config, 'scene', 'scene', "--scene")
    weights_file = _path(args, config, 'weights', 'weights', "--weights")
    scores_file = _path(args, config, 'out', 'scores', "--out", required=False)

    _display_settings(args, [
        ("config file", args.config),
        ("trajectories file", trajectories_file),
        ("scene file", scene_file),
        ("weights file", weights_file),
        ("scores file", scores_file),
        ("noise threshold", config.confidence.noise_threshold),
        ("kept trajectories file", args.kept),
    ])

    scene = _load_scene(scene_file)
    scorer = _load_scorer(scene, weights_file, config)
    trajectories = _load_trajectories(trajectories_file, config.features)

    cvs = _stage_score(trajectories, scorer, scores_file)
    _display_class_summary(cvs)

    if args.kept:
        kept, noise = filter_noise(trajectories, scorer, config.confidence.noise_threshold)
        logging.info("Saving %d kept trajectories (%d noise) to %r...", len(kept), len(noise), args.kept)
        save_trajectories(args.kept, kept)

    # Done
    logging.info("")
    logging.info("Done!")


def cmd_learn_zones(args):
    """
    Command handler: learn-zones

    Learns the lost, found and lost-found zones from the lost and found event positions.

    Parameters
    ----------
    args : argparse.Namespace
        argparse Namespace structure, obtained by argparse.ArgumentParser.parse_args().
    """
    config = _run_config(args)
    if args.kmax is not None:
        config = replace(config, zones=replace(config.zones, kmax=args.kmax))

    trajectories_file = _path(args, config, 'trajectories', 'trajectories', "--trajectories")
    scene_file = _path(args, config, 'scene', 'scene', "--scene")
    zones_file = _path(args, config, 'out', 'learned_zones', "--out")

    _display_settings(args, [
        ("config file", args.config),
        ("trajectories file", trajectories_file),
        ("scene file", scene_file),
        ("kmax", config.zones.kmax),
        ("seed", config.stage_seed('zones')),
        ("learned zones file", zones_file),
    ])

    scene = _load_scene(scene_file)
    trajectories = _load_trajectories(trajectories_file, config.features)
    _stage_learn_zones(trajectories, scene, config, zones_file)

    # Done
    logging.info("")
    logging.info("Done!")


def cmd_build_triplets(args):
    """
    Command handler: build-triplets

    Builds the prioritized zone triplets from the complete trajectories.

    Parameters
    ----------
    args : argparse.Namespace
        argparse Namespace structure, obtained by argparse.ArgumentParser.parse_args().
    """
    config = _run_config(args)
    if args.window is not None:
        config = replace(config, triplets=replace(config.triplets, window=args.window))
    if args.complete_threshold is not None:
        config = replace(config, confidence=replace(config.confidence, complete_threshold=args.complete_threshold))

    trajectories_file = _path(args, config, 'trajectories', 'trajectories', "--trajectories")
    scene_file = _path(args, config, 'scene', 'learned_zones', "--scene")
    weights_file = _path(args, config, 'weights', 'weights', "--weights")
    triplets_file = _path(args, config, 'out', 'triplets', "--out")

    _display_settings(args, [
        ("config file", args.config),
        ("trajectories file", trajectories_file),
        ("scene file", scene_file),
        ("weights file", weights_file),
        ("complete threshold", config.confidence.complete_threshold),
        ("window", config.triplets.window),
        ("triplets file", triplets_file),
    ])

    scene = _load_scene(scene_file)
    scorer = _load_scorer(scene, weights_file, config)
    trajectories = _load_trajectories(trajectories_file, config.features)

    cvs = _stage_score(trajectories, scorer)
    triplets = _stage_build_triplets(trajectories, cvs, scene, config, triplets_file)
    print(f"Built {len(triplets)} triplet(s)")

    # Done
    logging.info("")
    logging.info("Done!")


def cmd_repair(args):
    """
    Command handler: repair

    Fuses lost trajectories with re-appearing tracks through the zone triplets.

    Parameters
    ----------
    args : argparse.Namespace
        argparse Namespace structure, obtained by argparse.ArgumentParser.parse_args().
    """
    config = _run_config(args)
    overrides = {}
    if args.interpolate:
        overrides['interpolate'] = True
    if args.frame_rate is not None:
        overrides['frame_rate'] = args.frame_rate
    if overrides:
        config = replace(config, repair=replace(config.repair, **overrides))

    trajectories_file = _path(args, config, 'trajectories', 'trajectories', "--trajectories")
    scene_file = _path(args, config, 'scene', 'learned_zones', "--scene")
    triplets_file = _path(args, config, 'triplets', 'triplets', "--triplets")
    weights_file = _path(args, config, 'weights', 'weights', "--weights")
    repaired_file = _path(args, config, 'out', 'repaired', "--out")
    fusions_file = _path(args, config, 'fusions', 'fusions', "--fusions", required=False)
    report_file = _path(args, config, 'report', 'report', "--report", required=False)

    _display_settings(args, [
        ("config file", args.config),
        ("trajectories file", trajectories_file),
        ("scene file", scene_file),
        ("triplets file", triplets_file),
        ("weights file", weights_file),
        ("interpolate", config.repair.interpolate),
        ("repaired trajectories file", repaired_file),
        ("fusion log file", fusions_file),
        ("report file", report_file),
    ])

    scene = _load_scene(scene_file)
    scorer = _load_scorer(scene, weights_file, config)
    triplets = load_triplets(triplets_file)
    trajectories = _load_trajectories(trajectories_file, config.features)

    batch = _stage_repair(trajectories, scene, triplets, scorer, config, repaired_file, fusions_file)

    before_cvs = scorer.score_all(trajectories)
    after_cvs = scorer.score_all(batch.trajectories)
    _stage_evaluate(before_cvs, after_cvs, batch.summary.fusions, batch.summary.improved, report_file)

    # Done
    logging.info("")
    logging.info("Done!")


def cmd_evaluate(args):
    """
    Command handler: evaluate

    Compares the trajectory classes without and with the repair, and prints the report to
    standard output.

    Parameters
    ----------
    args : argparse.Namespace
        argparse Namespace structure, obtained by argparse.ArgumentParser.parse_args().
    """
    config = _run_config(args)
    before_file = _path(args, config, 'before', 'trajectories', "--before")
    after_file = _path(args, config, 'after', 'repaired', "--after")
    fusions_file = _path(args, config, 'fusions', 'fusions', "--fusions")
    scene_file = _path(args, config, 'scene', 'learned_zones', "--scene")
    weights_file = _path(args, config, 'weights', 'weights', "--weights")
    report_file = _path(args, config, 'out', 'report', "--out", required=False)

    _display_settings(args, [
        ("config file", args.config),
        ("trajectories file (without repair)", before_file),
        ("trajectories file (with repair)", after_file),
        ("fusion log file", fusions_file),
        ("scene file", scene_file),
        ("weights file", weights_file),
        ("report file", report_file),
    ])

    scene = _load_scene(scene_file)
    scorer = _load_scorer(scene, weights_file, config)
    before = _load_trajectories(before_file, config.features)
    after = _load_trajectories(after_file, config.features)
    fusions = load_fusion_log(fusions_file)

    _stage_evaluate(
        scorer.score_all(before),
        scorer.score_all(after),
        len(fusions),
        sum(1 for fusion in fusions if fusion['cv_after'] > fusion['cv_before']),
        report_file,
    )

    # Done
    logging.info("")
    logging.info("Done!")


def cmd_pipeline(args):
    """
    Command handler: pipeline

    Runs all stages on a synthetic scene: simulate, learn-weights, score, learn-zones,
    build-triplets, repair and evaluate. All outputs are written to the working directory.

    Parameters
    ----------
    args : argparse.Namespace
        argparse Namespace structure, obtained by argparse.ArgumentParser.parse_args().
    """
    config = _run_config(args)
    workdir = args.workdir or config.path('workdir') or DEFAULT_PIPELINE_WORKDIR
    files = {key: os.path.join(workdir, name) for key, name in PIPELINE_FILES.items()}

    _display_settings(args, [
        ("config file", args.config),
        ("seed", config.seed),
        ("working directory", workdir),
        ("uniform weights", args.uniform),
    ])

    os.makedirs(workdir, exist_ok=True)
    total_start_time = time.time()

    # Simulate
    logging.info("*** simulate ***")
    dataset = _stage_simulate(config, files['trajectories'], files['truth'], files['scene'])
    scene = dataset.scene
    trajectories = dataset.trajectories

    # Learn weights
    logging.info("*** learn-weights ***")
    weights, stats = _stage_learn_weights(trajectories, dataset.gt_values, scene, config, files['weights'],
                                          args.uniform)

    # Score
    logging.info("*** score ***")
    scorer = ConfidenceScorer(scene, weights, stats, config.features)
    cvs = _stage_score(trajectories, scorer, files['scores'])
    _display_class_summary(cvs)

    # Learn zones
    logging.info("*** learn-zones ***")
    learned_scene = _stage_learn_zones(trajectories, scene, config, files['learned_zones'])
    scorer = ConfidenceScorer(learned_scene, weights, stats, config.features)

    # Build triplets
    logging.info("*** build-triplets ***")
    triplets = _stage_build_triplets(trajectories, cvs, learned_scene, config, files['triplets'])

    # Repair
    logging.info("*** repair ***")
    batch = _stage_repair(trajectories, learned_scene, triplets, scorer, config, files['repaired'], files['fusions'])

    # Evaluate
    logging.info("*** evaluate ***")
    _stage_evaluate(cvs, scorer.score_all(batch.trajectories), batch.summary.fusions, batch.summary.improved,
                    files['report'])

    logging.info("")
    logging.info("Pipeline complete in %.2f seconds!", time.time() - total_start_time)

    # Done
    logging.info("")
    logging.info("Done!")


def _add_common_arguments(subparser):
    subparser.add_argument(
        "--config",
        type=str,
        metavar="FILENAME",
        help="TOML run configuration file.",
    )
    subparser.add_argument(
        "--seed",
        type=int,
        metavar="N",
        help="Global random seed (overrides [run] seed).",
    )


def _create_parser():
    parser = argparse.ArgumentParser(
        prog="trajectory_repair_tool",
        description="Trajectory Repair Toolkit: confidence scoring, zone learning and repair of lost trajectories",
    )

    parser.add_argument(
        '--version',
        action='version',
        version='%(prog)s 1.0',
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument(
        "-v",
        "--verbose",
        action="store_true",
        help="Display debug messages.",
    )
    verbosity.add_argument(
        "-q",
        "--quiet",
        action="store_true",
        help="Display only warnings and errors.",
    )

    # Sub-commands
    subparsers = parser.add_subparsers(
        title="valid commands",
        metavar="command",
        help="command description",
        required=True,
    )

    # Command: simulate
    subparser = subparsers.add_parser(
        "simulate",
        aliases=["sim"],
        help="Generate synthetic trajectories with injected track splits.",
    )
    subparser.set_defaults(
        command="simulate",
        command_function=cmd_simulate,
    )
    _add_common_arguments(subparser)
    subparser.add_argument(
        "--out",
        type=str,
        metavar="FILENAME",
        help="Output trajectory file (CSV).",
    )
    subparser.add_argument(
        "--truth",
        type=str,
        metavar="FILENAME",
        help="Output ground-truth file (CSV).",
    )
    subparser.add_argument(
        "--scene",
        type=str,
        metavar="FILENAME",
        help="Output zone file (XML) with the entry and exit zones of the synthetic scene.",
    )

    # Command: learn-weights
    subparser = subparsers.add_parser(
        "learn-weights",
        aliases=["lw"],
        help="Learn the feature weights with the genetic algorithm.",
    )
    subparser.set_defaults(
        command="learn-weights",
        command_function=cmd_learn_weights,
    )
    _add_common_arguments(subparser)
    subparser.add_argument(
        "--train",
        type=str,
        metavar="FILENAME",
        help="Training trajectory file (CSV).",
    )
    subparser.add_argument(
        "--gt",
        type=str,
        metavar="FILENAME",
        help="Ground-truth file (CSV) with the gt_value of the training trajectories.",
    )
    subparser.add_argument(
        "--scene",
        type=str,
        metavar="FILENAME",
        help="Zone file (XML) with the entry, exit and IO zones.",
    )
    subparser.add_argument(
        "--pop",
        type=int,
        metavar="N",
        help="Population size (overrides [ga] population_size).",
    )
    subparser.add_argument(
        "--max-generations",
        type=int,
        metavar="N",
        help="Maximum number of generations (overrides [ga] max_generations).",
    )
    subparser.add_argument(
        "--train-size",
        type=int,
        metavar="N",
        help="Maximum number of training trajectories (overrides [ga] train_size).",
    )
    subparser.add_argument(
        "--uniform",
        action="store_true",
        help="Skip the genetic algorithm and store uniform weights.",
    )
    subparser.add_argument(
        "--out",
        type=str,
        metavar="FILENAME",
        help="Output weights file (JSON).",
    )

    # Command: score
    subparser = subparsers.add_parser(
        "score",
        aliases=["sc"],
        help="Compute the trajectory confidence values and classes.",
    )
    subparser.set_defaults(
        command="score",
        command_function=cmd_score,
    )
    _add_common_arguments(subparser)
    subparser.add_argument(
        "--trajectories",
        type=str,
        metavar="FILENAME",
        help="Trajectory file (CSV).",
    )
    subparser.add_argument(
        "--scene",
        type=str,
        metavar="FILENAME",
        help="Zone file (XML).",
    )
    subparser.add_argument(
        "--weights",
        type=str,
        metavar="FILENAME",
        help="Weights file (JSON).",
    )
    subparser.add_argument(
        "--out",
        type=str,
        metavar="FILENAME",
        help="Output score file (CSV).",
    )
    subparser.add_argument(
        "--noise-threshold",
        type=float,
        metavar="CV",
        help="Noise threshold (overrides [confidence] noise_threshold).",
    )
    subparser.add_argument(
        "--kept",
        type=str,
        metavar="FILENAME",
        help="Output trajectory file (CSV) with the trajectories that are not noise.",
    )

    # Command: learn-zones
    subparser = subparsers.add_parser(
        "learn-zones",
        aliases=["lz"],
        help="Learn the lost, found and lost-found zones.",
    )
    subparser.set_defaults(
        command="learn-zones",
        command_function=cmd_learn_zones,
    )
    _add_common_arguments(subparser)
    subparser.add_argument(
        "--trajectories",
        type=str,
        metavar="FILENAME",
        help="Trajectory file (CSV).",
    )
    subparser.add_argument(
        "--scene",
        type=str,
        metavar="FILENAME",
        help="Zone file (XML) with the manually defined zones.",
    )
    subparser.add_argument(
        "--kmax",
        type=int,
        metavar="K",
        help="Largest number of clusters per zone kind (overrides [zones] kmax).",
    )
    subparser.add_argument(
        "--out",
        type=str,
        metavar="FILENAME",
        help="Output zone file (XML) with the manual and the learned zones.",
    )

    # Command: build-triplets
    subparser = subparsers.add_parser(
        "build-triplets",
        aliases=["bt"],
        help="Build the zone triplets from the complete trajectories.",
    )
    subparser.set_defaults(
        command="build-triplets",
        command_function=cmd_build_triplets,
    )
    _add_common_arguments(subparser)
    subparser.add_argument(
        "--trajectories",
        type=str,
        metavar="FILENAME",
        help="Trajectory file (CSV).",
    )
    subparser.add_argument(
        "--scene",
        type=str,
        metavar="FILENAME",
        help="Zone file (XML) with the learned zones.",
    )
    subparser.add_argument(
        "--weights",
        type=str,
        metavar="FILENAME",
        help="Weights file (JSON).",
    )
    subparser.add_argument(
        "--complete-threshold",
        type=float,
        metavar="CV",
        help="Confidence threshold of complete trajectories (overrides [confidence] complete_threshold).",
    )
    subparser.add_argument(
        "--window",
        type=str,
        choices=WINDOW_MODES,
        help="Triplet time window: mean of the trajectory times, or their min/max (overrides [triplets] window).",
    )
    subparser.add_argument(
        "--out",
        type=str,
        metavar="FILENAME",
        help="Output triplet file (CSV).",
    )

    # Command: repair
    subparser = subparsers.add_parser(
        "repair",
        aliases=["r"],
        help="Fuse lost trajectories with re-appearing tracks.",
    )
    subparser.set_defaults(
        command="repair",
        command_function=cmd_repair,
    )
    _add_common_arguments(subparser)
    subparser.add_argument(
        "--trajectories",
        type=str,
        metavar="FILENAME",
        help="Trajectory file (CSV).",
    )
    subparser.add_argument(
        "--scene",
        type=str,
        metavar="FILENAME",
        help="Zone file (XML) with the learned zones.",
    )
    subparser.add_argument(
        "--triplets",
        type=str,
        metavar="FILENAME",
        help="Triplet file (CSV).",
    )
    subparser.add_argument(
        "--weights",
        type=str,
        metavar="FILENAME",
        help="Weights file (JSON).",
    )
    subparser.add_argument(
        "--interpolate",
        action="store_true",
        help="Fill the fusion gaps with linearly interpolated observations.",
    )
    subparser.add_argument(
        "--frame-rate",
        type=float,
        metavar="FPS",
        help="Frame rate of the interpolated observations (default: estimated from the trajectories).",
    )
    subparser.add_argument(
        "--out",
        type=str,
        metavar="FILENAME",
        help="Output trajectory file (CSV) with the repaired trajectories.",
    )
    subparser.add_argument(
        "--fusions",
        type=str,
        metavar="FILENAME",
        help="Output fusion log (CSV).",
    )
    subparser.add_argument(
        "--report",
        type=str,
        metavar="FILENAME",
        help="Output report (text, with a CSV twin).",
    )

    # Command: evaluate
    subparser = subparsers.add_parser(
        "evaluate",
        aliases=["e"],
        help="Compare the trajectory classes without and with the repair.",
    )
    subparser.set_defaults(
        command="evaluate",
        command_function=cmd_evaluate,
    )
    _add_common_arguments(subparser)
    subparser.add_argument(
        "--before",
        type=str,
        metavar="FILENAME",
        help="Trajectory file (CSV) without the repair.",
    )
    subparser.add_argument(
        "--after",
        type=str,
        metavar="FILENAME",
        help="Trajectory file (CSV) with the repair.",
    )
    subparser.add_argument(
        "--fusions",
        type=str,
        metavar="FILENAME",
        help="Fusion log (CSV) written by the repair command.",
    )
    subparser.add_argument(
        "--scene",
        type=str,
        metavar="FILENAME",
        help="Zone file (XML) with the learned zones.",
    )
    subparser.add_argument(
        "--weights",
        type=str,
        metavar="FILENAME",
        help="Weights file (JSON).",
    )
    subparser.add_argument(
        "--out",
        type=str,
        metavar="FILENAME",
        help="Output report (text, with a CSV twin).",
    )

    # Command: pipeline
    subparser = subparsers.add_parser(
        "pipeline",
        aliases=["p"],
        help="Run all stages on a synthetic scene.",
    )
    subparser.set_defaults(
        command="pipeline",
        command_function=cmd_pipeline,
    )
    _add_common_arguments(subparser)
    subparser.add_argument(
        "--workdir",
        type=str,
        metavar="DIRECTORY",
        help=f"Output directory (default: [paths] workdir, or {DEFAULT_PIPELINE_WORKDIR!r}).",
    )
    subparser.add_argument(
        "--uniform",
        action="store_true",
        help="Skip the genetic algorithm and use uniform weights.",
    )

    return parser


def main(args=None):
    """
    Entry-point function.

    Parameters
    ----------
    args : iterable or None
        List of command-line arguments without application name. If not provided, sys.argv[1:] is used.

    Returns
    -------
    exit_code : int
        0 on success, 1 on invalid input data or configuration, 2 on invalid command-line arguments.
    """

    if args is None:
        args = sys.argv[1:]

    # *** Basic logging setup ***
    logging.basicConfig(
        level=logging.INFO,
        format="{message}",
        style="{",
    )

    # *** Parse command-line arguments ***
    parser = _create_parser()
    try:
        args = parser.parse_args(args)
    except SystemExit as e:
        return e.code or 0

    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    elif args.quiet:
        logging.getLogger().setLevel(logging.WARNING)
    else:
        logging.getLogger().setLevel(logging.INFO)

    # *** Run the command ***
    logging.info("Trajectory Repair Toolkit")
    try:
        args.command_function(args)
    except ToolkitError as e:
        logging.error("Error: %s", e)
        return 1
    except OSError as e:
        logging.error("Error: %s", e)
        return 1

    return 0


if __name__ == '__main__':
    sys.exit(main())
