"""
Learning of lost, found and lost-found zones from the positions of tracking events.

The positions where tracks are lost (resp. found) are collected, excluding those inside the
manually defined exit (resp. entry) zones. The number of clusters is selected by fitting
Gaussian mixtures with EM and comparing their Bayesian information criterion; the points are
then clustered with K-means, and each cluster is outlined by its (expanded) bounding rectangle.
Lost and found zones that largely overlap are merged into lost-found zones.
"""
import logging
import math
import time
import warnings
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from sklearn.exceptions import ConvergenceWarning
from sklearn.mixture import GaussianMixture

from .exceptions import ClusteringError, ConfigError
from .model import (
    ENTRY_KINDS,
    EXIT_KINDS,
    EventKind,
    GroundPoint,
    SceneModel,
    Zone,
    ZoneKind,
    rectangle_outline,
    zones_containing,
)
from .utils import bounding_rectangle, config_from_mapping, rectangle_overlap_fraction, rectangle_union_bounds

logger = logging.getLogger(__name__)

LEARNED_ZONE_NAME = "ZoneLearning{}"


@dataclass(frozen=True)
class ZoneLearningConfig:
    kmax: int = 12
    margin_fraction: float = 0.05  # of the rectangle diagonal
    min_margin: float = 10.0  # for degenerate (zero width or height) rectangles
    overlap_fraction: float = 0.5  # of the smaller rectangle
    em_max_iter: int = 50
    em_restarts: int = 1
    kmeans_max_iter: int = 100
    # Count first detections outside entry zones as found positions
    found_from_appearances: bool = True

    def __post_init__(self):
        if self.kmax < 1:
            raise ConfigError("zones.kmax must be at least 1")
        if self.margin_fraction < 0 or self.min_margin < 0:
            raise ConfigError("Zone margins must be non-negative")
        if not 0 <= self.overlap_fraction <= 1:
            raise ConfigError("zones.overlap_fraction must lie in [0, 1]")
        if self.em_max_iter < 1 or self.em_restarts < 1 or self.kmeans_max_iter < 1:
            raise ConfigError("Iteration and restart counts must be at least 1")

    @classmethod
    def from_mapping(cls, mapping):
        return config_from_mapping(cls, mapping, section="zones")


@dataclass(frozen=True, eq=False)
class ClusterModel:
    k: int
    centroids: Tuple[GroundPoint, ...]
    assignments: np.ndarray
    within_ss: float
    points: np.ndarray
    history: Tuple[float, ...]  # within-cluster sum of squares after each assignment step

    def cluster_points(self, index):
        return self.points[self.assignments == index]


def collect_event_points(trajectories, scene, kind, include_appearances=False):
    """
    Collect the ground positions of lost or found events.

    Lost positions inside exit or IO zones and found positions inside entry or IO zones are
    excluded, since those zones explain the disappearance (resp. appearance) of the object.

    Parameters
    ----------
    trajectories : iterable of Trajectory
        Trajectories of the learning stage.
    scene : SceneModel
        Scene with the manually defined entry, exit and IO zones.
    kind : ZoneKind
        ZoneKind.LOST or ZoneKind.FOUND.
    include_appearances : bool, optional
        For found positions, also count the first detection of every trajectory (the exclusion
        of entry and IO zones leaves only the abnormal appearances).

    Returns
    -------
    points : list of GroundPoint
        Event positions, in trajectory and event order.
    """
    if kind == ZoneKind.LOST:
        event_kinds = (EventKind.LOST, )
        excluded = EXIT_KINDS
    elif kind == ZoneKind.FOUND:
        event_kinds = (EventKind.FOUND, EventKind.FIRST_DETECTED) if include_appearances else (EventKind.FOUND, )
        excluded = ENTRY_KINDS
    else:
        raise ValueError(f"Event points can only be collected for lost or found zones, not {kind}")

    points = []
    for trajectory in trajectories:
        for event in trajectory.events_of(*event_kinds):
            if not zones_containing(scene, event.position, excluded):
                points.append(event.position)
    return points


def _as_array(points):
    if len(points) and isinstance(points[0], GroundPoint):
        return np.array([(p.x, p.y) for p in points], dtype=np.float64)
    return np.asarray(points, dtype=np.float64).reshape(-1, 2)


def _squared_distances(points, centroids):
    return ((points[:, np.newaxis, :] - centroids[np.newaxis, :, :])**2).sum(axis=2)


def _assign(points, centroids):
    distances = _squared_distances(points, centroids)
    assignments = distances.argmin(axis=1)  # ties go to the lowest centroid index
    return assignments, float(distances[np.arange(len(points)), assignments].sum())


def _seed_centroids(points, k, rng):
    # k-means++ seeding; already chosen points have zero weight, so the centroids are distinct
    centroids = [points[rng.integers(len(points))]]
    closest = _squared_distances(points, np.array(centroids)).min(axis=1)
    for _ in range(1, k):
        index = rng.choice(len(points), p=closest / closest.sum())
        centroids.append(points[index])
        closest = np.minimum(closest, ((points - points[index])**2).sum(axis=1))
    return np.array(centroids)


def kmeans(points, k, seed, max_iter=100):
    """
    Cluster ground points with Lloyd's K-means algorithm.

    Parameters
    ----------
    points : list of GroundPoint or numpy.ndarray
        Points to cluster ((N, 2) array or GroundPoint list), N >= 1.
    k : int
        Number of clusters, 1 <= k <= number of distinct points.
    seed : int
        Seed for the k-means++ initialization.
    max_iter : int, optional
        Maximum number of Lloyd iterations.

    Returns
    -------
    model : ClusterModel
        Centroids, point assignments (each point to its nearest centroid) and within-cluster
        sum of squares.
    """
    points = _as_array(points)
    if len(points) == 0:
        raise ClusteringError("Cannot cluster an empty point set")
    if k < 1 or k > len(points):
        raise ClusteringError(f"Cannot form {k} cluster(s) from {len(points)} point(s)")
    distinct = len(np.unique(points, axis=0))
    if k > distinct:
        raise ClusteringError(f"Cannot form {k} cluster(s) from {distinct} distinct point(s)")

    rng = np.random.default_rng(seed)
    centroids = _seed_centroids(points, k, rng)
    assignments, within_ss = _assign(points, centroids)
    history = [within_ss]

    for iteration in range(max_iter):
        updated = centroids.copy()
        for index in range(k):
            members = points[assignments == index]
            if len(members):  # an emptied cluster keeps its centroid
                updated[index] = members.mean(axis=0)

        new_assignments, within_ss = _assign(points, updated)
        centroids = updated
        history.append(within_ss)

        if np.array_equal(new_assignments, assignments):
            logger.debug("K-means (k=%d) converged after %d iteration(s)", k, iteration + 1)
            break
        assignments = new_assignments
    else:
        logger.debug("K-means (k=%d) stopped after %d iterations without convergence", k, max_iter)

    return ClusterModel(
        k=k,
        centroids=tuple(GroundPoint(float(x), float(y)) for x, y in centroids),
        assignments=assignments,
        within_ss=within_ss,
        points=points,
        history=tuple(history),
    )


def select_k(points, kmax, seed, max_iter=50, n_init=1):
    """
    Select the number of clusters with EM-fitted Gaussian mixtures and the BIC.

    Spherical Gaussian mixtures with k = 1..min(kmax, number of distinct points) components are
    fitted, and the k with the lowest Bayesian information criterion is returned.

    Parameters
    ----------
    points : list of GroundPoint or numpy.ndarray
        Points to cluster, N >= 1.
    kmax : int
        Largest number of clusters to consider, >= 1.
    seed : int
        Seed for the mixture initialization.
    max_iter : int, optional
        Maximum number of EM iterations per fit.
    n_init : int, optional
        Number of EM restarts per k.

    Returns
    -------
    k : int
        Selected number of clusters.
    """
    points = _as_array(points)
    if len(points) == 0:
        raise ClusteringError("Cannot select the number of clusters of an empty point set")

    upper = min(kmax, len(np.unique(points, axis=0)))
    if upper <= 1:
        return 1

    bics = []
    for k in range(1, upper + 1):
        gmm = GaussianMixture(
            n_components=k,
            covariance_type='spherical',
            max_iter=max_iter,
            n_init=n_init,
            random_state=seed,
        )
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', category=ConvergenceWarning)
            gmm.fit(points)
        bics.append(gmm.bic(points))

    best = int(np.argmin(bics)) + 1
    logger.debug("BIC per number of clusters: %s -> k=%d", ", ".join(f"{bic:.2f}" for bic in bics), best)
    return best


def build_zones(model, kind, next_ident, name_start=0, margin_fraction=0.05, min_margin=10.0):
    """
    Outline every cluster by its bounding rectangle, expanded by a margin.

    Parameters
    ----------
    model : ClusterModel
        Clustering result.
    kind : ZoneKind
        Kind of the learned zones (ZoneKind.LOST or ZoneKind.FOUND).
    next_ident : int
        Ident of the first learned zone; the following zones get consecutive idents.
    name_start : int, optional
        Number of the first zone name, ZoneLearning<n>.
    margin_fraction : float, optional
        Margin as a fraction of the rectangle diagonal.
    min_margin : float, optional
        Margin of rectangles with zero width or height (e.g., single-point clusters).

    Returns
    -------
    zones : list of Zone
        One zone per non-empty cluster, ordered by centroid position (x, then y).
    """
    order = sorted(range(model.k), key=lambda index: (model.centroids[index].x, model.centroids[index].y))

    zones = []
    for index in order:
        members = model.cluster_points(index)
        if not len(members):
            continue

        x_min, y_min, x_max, y_max = bounding_rectangle(members)
        width = x_max - x_min
        height = y_max - y_min

        margin = margin_fraction * math.hypot(width, height)
        if width == 0 or height == 0:
            margin = max(margin, min_margin)

        zones.append(
            Zone(
                ident=next_ident + len(zones),
                name=LEARNED_ZONE_NAME.format(name_start + len(zones)),
                kind=kind,
                outline=rectangle_outline(x_min - margin, y_min - margin, x_max + margin, y_max + margin),
            ))

    return zones


def merge_lost_found(lost_zones, found_zones, overlap_fraction=0.5):
    """
    Merge overlapping lost and found zones into lost-found zones.

    A lost zone is merged with the found zone it overlaps most, if the intersection exceeds
    `overlap_fraction` of the smaller rectangle. The merged zone keeps the ident and name of
    the lost zone and spans the bounding rectangle of both.

    Parameters
    ----------
    lost_zones : list of Zone
        Learned lost zones.
    found_zones : list of Zone
        Learned found zones.
    overlap_fraction : float, optional
        Minimum overlap for merging (exclusive).

    Returns
    -------
    zones : list of Zone
        Merged lost-found zones and the unmerged zones, ordered by ident.
    """
    remaining = list(found_zones)
    zones = []

    for lost in lost_zones:
        best = None
        best_fraction = overlap_fraction
        for found in remaining:
            fraction = rectangle_overlap_fraction(lost.bounds, found.bounds)
            if fraction > best_fraction:
                best = found
                best_fraction = fraction

        if best is None:
            zones.append(lost)
            continue

        remaining.remove(best)
        logger.debug("Merging lost zone %d and found zone %d (overlap %.2f)", lost.ident, best.ident, best_fraction)
        zones.append(
            Zone(
                ident=lost.ident,
                name=lost.name,
                kind=ZoneKind.LOST_FOUND,
                outline=rectangle_outline(*rectangle_union_bounds(lost.bounds, best.bounds)),
                plane_name=lost.plane_name,
            ))

    zones.extend(remaining)
    return sorted(zones, key=lambda zone: zone.ident)


def learn_zones(trajectories, scene, config=None, seed=0):
    """
    Learn the lost, found and lost-found zones of a scene.

    Previously learned zones of the input scene are discarded; the manual entry, exit and IO
    zones are kept, and the learned zones get idents after the highest manual ident.

    Parameters
    ----------
    trajectories : list of Trajectory
        Trajectories of the learning stage.
    scene : SceneModel
        Scene with the manually defined zones.
    config : ZoneLearningConfig, optional
        Learning parameters.
    seed : int, optional
        Seed for the mixture fits and the K-means initialization.

    Returns
    -------
    scene : SceneModel
        New scene with the manual and the learned zones.
    """
    config = config or ZoneLearningConfig()
    start_time = time.time()

    manual = [zone for zone in scene.zones if not (zone.kind.is_lost_like or zone.kind.is_found_like)]
    manual_scene = SceneModel(zones=manual, norm_stats=scene.norm_stats)

    next_ident = manual_scene.next_ident()
    name_start = 0
    learned = {}
    for kind in (ZoneKind.LOST, ZoneKind.FOUND):
        points = collect_event_points(
            trajectories,
            manual_scene,
            kind,
            include_appearances=config.found_from_appearances,
        )
        if not points:
            logger.info("No %s positions to cluster", kind.value)
            learned[kind] = []
            continue

        k = select_k(points, config.kmax, seed, max_iter=config.em_max_iter, n_init=config.em_restarts)
        model = kmeans(points, k, seed, max_iter=config.kmeans_max_iter)
        zones = build_zones(
            model,
            kind,
            next_ident,
            name_start=name_start,
            margin_fraction=config.margin_fraction,
            min_margin=config.min_margin,
        )
        logger.info("Learned %d %s zone(s) from %d position(s)", len(zones), kind.value, len(points))

        learned[kind] = zones
        next_ident += len(zones)
        name_start += len(zones)

    merged = merge_lost_found(learned[ZoneKind.LOST], learned[ZoneKind.FOUND], config.overlap_fraction)
    num_merged = sum(1 for zone in merged if zone.kind == ZoneKind.LOST_FOUND)
    logger.info("Zone learning: %d zone(s) (%d lost-found) in %.2f seconds", len(merged), num_merged,
                time.time() - start_time)

    return SceneModel(zones=manual + merged, norm_stats=scene.norm_stats)
