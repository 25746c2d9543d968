from . import confidence
from . import dataset
from . import evaluation
from . import repair
from . import triplets
from . import zone_file
from .model import SceneModel


def _scorer(scene, weights_file, feature_config=None):
    weights, stats = confidence.load_weights(weights_file)
    return confidence.ConfidenceScorer(scene, weights, stats, feature_config)


def score_trajectory_file(trajectories_file, scene_file, weights_file):
    """
    Score the trajectories stored in a CSV file.

    This function is a helper wrapper for confidence.ConfidenceScorer.score_all() function.

    Returns
    -------
    scores : dict
        Trajectory id -> confidence value.
    """
    scene = SceneModel(zones=zone_file.load_zone_file(scene_file))
    scorer = _scorer(scene, weights_file)
    trajectories = dataset.load_trajectories(trajectories_file)
    return {trajectory.id: cv for trajectory, cv in zip(trajectories, scorer.score_all(trajectories))}


def repair_trajectory_file(trajectories_file, scene_file, triplets_file, weights_file, interpolate=False):
    """
    Repair the trajectories stored in a CSV file, using the learned zones and triplets.

    The scene file must contain the learned (lost, found, lost-found) zones in addition to the
    manually defined ones. This function is a helper wrapper for repair.repair_batch() function.

    Returns
    -------
    batch : repair.RepairBatch
        Repaired trajectories, per-fusion results and the summary.
    report : evaluation.EvaluationReport
        Class counts without and with the repair.
    """
    scene = SceneModel(zones=zone_file.load_zone_file(scene_file))
    scorer = _scorer(scene, weights_file)
    trajectories = dataset.load_trajectories(trajectories_file)

    batch = repair.repair_batch(
        trajectories,
        scene,
        triplets.load_triplets(triplets_file),
        scorer,
        interpolate=interpolate,
    )
    report = evaluation.evaluate(
        scorer.score_all(trajectories),
        scorer.score_all(batch.trajectories),
        batch.summary.fusions,
        batch.summary.improved,
    )
    return batch, report
