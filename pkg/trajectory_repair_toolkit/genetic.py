"""
Learning of the feature weights with a genetic algorithm.

An individual is a set of nine non-negative weights summing to 1. The fitness of an individual
is the sum of absolute differences between the ground-truth confidence and the confidence value
computed with its weights, over the training set (lower is better).

Each generation keeps the best individuals unchanged (elitism), and produces the rest from
randomly paired parents among the better half of the population by suffix-swapping cross-over
and suffix-redrawing mutation. Every operator renormalizes the weights to sum to 1.
"""
import logging
import time
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .confidence import WeightVector, transform_features
from .exceptions import ConfigError, ValidationError
from .features import NUM_FEATURES, extract_raw, normalize
from .utils import config_from_mapping

logger = logging.getLogger(__name__)

# Default stop threshold: mean absolute error of 0.05 per training trajectory
DEFAULT_MEAN_ERROR_THRESHOLD = 0.05


@dataclass
class Individual:
    weights: np.ndarray
    fitness: Optional[float] = None  # None: unevaluated

    def weight_vector(self):
        return WeightVector.from_array(self.weights)

    def evaluate(self, train):
        """Compute, store and return the fitness of the individual on the training set."""
        self.fitness = fitness(self.weights, train)
        return self.fitness


@dataclass(frozen=True, eq=False)
class TrainingSet:
    """
    Normalized feature vectors with their ground-truth confidence values.

    Parameters
    ----------
    features : numpy.ndarray
        (N, 9) array of normalized features.
    ground_truth : numpy.ndarray
        (N,) array of ground-truth values in [0, 1].
    """
    features: np.ndarray
    ground_truth: np.ndarray
    contributions: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64).reshape(-1, NUM_FEATURES)
        ground_truth = np.asarray(self.ground_truth, dtype=np.float64).reshape(-1)
        if len(features) != len(ground_truth):
            raise ValidationError("Training set features and ground truth differ in length")
        if np.any((ground_truth < 0) | (ground_truth > 1)):
            raise ValidationError("Ground-truth values must lie in [0, 1]")

        object.__setattr__(self, 'features', features)
        object.__setattr__(self, 'ground_truth', ground_truth)
        object.__setattr__(self, 'contributions', transform_features(features))

    @classmethod
    def from_entries(cls, entries):
        """Build from (FeatureVector, ground truth) pairs."""
        entries = list(entries)
        features = np.array([fv.values for fv, _ in entries], dtype=np.float64).reshape(-1, NUM_FEATURES)
        return cls(features, np.array([gt for _, gt in entries], dtype=np.float64))

    def __len__(self):
        return len(self.ground_truth)


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 5000
    mutation_prob: float = 0.30
    crossover_prob: float = 0.80
    fitness_threshold: Optional[float] = None  # None: 0.05 * training set size
    max_generations: int = 200
    elite_count: int = 50
    rng_seed: int = 0
    train_size: int = 300

    def __post_init__(self):
        if not (0 <= self.mutation_prob <= 1 and 0 <= self.crossover_prob <= 1):
            raise ConfigError("GA probabilities must lie in [0, 1]")
        if self.population_size < 2:
            raise ConfigError("GA population size must be at least 2")
        if self.elite_count < 1:
            raise ConfigError("GA elite count must be at least 1")
        if self.max_generations < 0 or self.train_size < 1:
            raise ConfigError("GA max_generations must be >= 0 and train_size >= 1")

    @classmethod
    def from_mapping(cls, mapping):
        return config_from_mapping(cls, mapping, section="ga")


@dataclass(frozen=True)
class EvolutionResult:
    best: WeightVector
    best_fitness: float
    history: Tuple[float, ...]
    converged: bool
    generations: int
    elites: Tuple[Individual, ...] = ()  # final elite, best first, with evaluated fitness


def fitness(weights, train):
    """
    Fitness of a weight vector: sum over the training set of |GT(i) - CV(i)| (not averaged).

    Parameters
    ----------
    weights : WeightVector or numpy.ndarray
        The nine feature weights.
    train : TrainingSet
        Training set.

    Returns
    -------
    phi : float
        The fitness value; lower is better.
    """
    if isinstance(weights, WeightVector):
        weights = weights.as_array()
    errors = train.ground_truth - train.contributions @ np.asarray(weights, dtype=np.float64)
    return float(np.abs(errors).sum())


def population_fitness(population, train):
    """Fitness of every row of a (P, 9) population array; returns a (P,) array."""
    cvs = train.contributions @ population.T  # (N, P)
    return np.abs(cvs - train.ground_truth[:, np.newaxis]).sum(axis=0)


def _normalized(weights, fallback=None):
    total = weights.sum()
    if total <= 0:
        return fallback.copy()
    return weights / total


def mutate(individual, rng, position=None):
    """
    Mutation: redraw all weights from a random position to the end, then renormalize.

    Parameters
    ----------
    individual : Individual
        Parent individual (left unmodified).
    rng : numpy.random.Generator
        Random number generator.
    position : int, optional
        0-based start position; drawn uniformly from 0..8 if not given.

    Returns
    -------
    child : Individual
        Mutated individual with unevaluated fitness.
    """
    if position is None:
        position = int(rng.integers(NUM_FEATURES))

    weights = np.array(individual.weights, dtype=np.float64, copy=True)
    while True:
        weights[position:] = rng.uniform(0.0, 1.0, NUM_FEATURES - position)
        total = weights.sum()
        if total > 0:  # all-zero draw: redraw
            break

    return Individual(weights / total)


def crossover(parent_a, parent_b, rng, position=None):
    """
    Cross-over: swap all weights from a random position to the end, then renormalize both children.

    A child whose weights would all be zero keeps the weights of its own parent.

    Parameters
    ----------
    parent_a, parent_b : Individual
        Parent individuals (left unmodified).
    rng : numpy.random.Generator
        Random number generator.
    position : int, optional
        0-based start position; drawn uniformly from 0..8 if not given.

    Returns
    -------
    children : tuple of Individual
        The two children, with unevaluated fitness.
    """
    if position is None:
        position = int(rng.integers(NUM_FEATURES))

    a = np.asarray(parent_a.weights, dtype=np.float64)
    b = np.asarray(parent_b.weights, dtype=np.float64)

    child_a = np.concatenate((a[:position], b[position:]))
    child_b = np.concatenate((b[:position], a[position:]))

    return Individual(_normalized(child_a, fallback=a)), Individual(_normalized(child_b, fallback=b))


def _random_population(rng, size):
    population = rng.uniform(0.0, 1.0, (size, NUM_FEATURES))
    totals = population.sum(axis=1)
    while np.any(totals <= 0):
        degenerate = totals <= 0
        population[degenerate] = rng.uniform(0.0, 1.0, (int(degenerate.sum()), NUM_FEATURES))
        totals = population.sum(axis=1)
    return population / totals[:, np.newaxis]


def _ranking(fitness_values):
    # Ascending fitness; ties broken by individual index
    return np.lexsort((np.arange(len(fitness_values)), fitness_values))


def _next_generation(population, fitness_values, rng, config):
    size = len(population)
    ranking = _ranking(fitness_values)

    elite_count = min(config.elite_count, size)
    elites = population[ranking[:elite_count]]

    # Parents are paired uniformly at random within the better half, without replacement
    pool = ranking[:max(2, size // 2)]
    num_children = size - elite_count

    children = []
    while len(children) < num_children:
        shuffled = rng.permutation(pool)
        for i in range(0, len(shuffled) - 1, 2):
            parent_a = Individual(population[shuffled[i]], float(fitness_values[shuffled[i]]))
            parent_b = Individual(population[shuffled[i + 1]], float(fitness_values[shuffled[i + 1]]))
            if rng.random() < config.crossover_prob:
                children.extend(crossover(parent_a, parent_b, rng))
            else:
                children.extend((
                    Individual(parent_a.weights.copy(), parent_a.fitness),
                    Individual(parent_b.weights.copy(), parent_b.fitness),
                ))
            if len(children) >= num_children:
                break
    children = children[:num_children]

    for i, child in enumerate(children):
        if rng.random() < config.mutation_prob:
            children[i] = mutate(child, rng)

    if not children:
        return elites.copy()
    return np.vstack([elites] + [child.weights for child in children])


def evolve(train, config=None):
    """
    Learn feature weights with the genetic algorithm.

    Parameters
    ----------
    train : TrainingSet
        Training set (non-empty).
    config : GaConfig, optional
        Algorithm parameters; defaults are used if not provided.

    Returns
    -------
    result : EvolutionResult
        Best weights ever seen, their fitness, per-generation best fitness history (starting with
        the initial population), convergence flag (best fitness below the threshold), number of
        generations produced, and the final elite individuals with their fitness.
    """
    config = config or GaConfig()
    if len(train) == 0:
        raise ValidationError("Cannot learn weights from an empty training set")

    threshold = config.fitness_threshold
    if threshold is None:
        threshold = DEFAULT_MEAN_ERROR_THRESHOLD * len(train)

    rng = np.random.default_rng(config.rng_seed)
    start_time = time.time()

    population = _random_population(rng, config.population_size)
    fitness_values = population_fitness(population, train)
    history = [float(fitness_values.min())]

    generation = 0
    while history[-1] >= threshold and generation < config.max_generations:
        population = _next_generation(population, fitness_values, rng, config)
        fitness_values = population_fitness(population, train)
        generation += 1
        history.append(float(fitness_values.min()))
        logger.debug("Generation %d: best fitness %.6f", generation, history[-1])

    ranking = _ranking(fitness_values)
    best_index = ranking[0]
    best_fitness = float(fitness_values[best_index])
    elites = tuple(
        Individual(population[index].copy(), float(fitness_values[index]))
        for index in ranking[:min(config.elite_count, len(population))]
    )
    converged = best_fitness < threshold

    logger.info(
        "Genetic algorithm: %d generation(s), best fitness %.4f (threshold %.4f, %s) in %.2f seconds",
        generation,
        best_fitness,
        threshold,
        "converged" if converged else "not converged",
        time.time() - start_time,
    )

    return EvolutionResult(
        best=WeightVector.from_array(population[best_index]),
        best_fitness=best_fitness,
        history=tuple(history),
        converged=converged,
        generations=generation,
        elites=elites,
    )


def build_training_set(trajectories, ground_truth, scene, stats, feature_config=None, train_size=300):
    """
    Build the training set from the first trajectories that have a ground-truth value.

    Parameters
    ----------
    trajectories : list of Trajectory
        Candidate trajectories.
    ground_truth : dict
        Mapping trajectory id -> ground-truth value in [0, 1].
    scene : SceneModel
        Scene with the entry, exit and IO zones.
    stats : NormalizationStats
        Normalization statistics.
    feature_config : FeatureConfig, optional
        Feature extraction thresholds.
    train_size : int, optional
        Maximum number of training trajectories, taken in order of their first detection.

    Returns
    -------
    train : TrainingSet
        The training set.
    """
    annotated = [trajectory for trajectory in trajectories if trajectory.id in ground_truth]
    annotated.sort(key=lambda trajectory: trajectory.first.t)  # stable: file order on ties
    selected = annotated[:train_size]

    entries = [
        (normalize(extract_raw(trajectory, scene, feature_config), stats), ground_truth[trajectory.id])
        for trajectory in selected
    ]
    return TrainingSet.from_entries(entries)
