import numpy as np
import pytest

from trajectory_repair_toolkit.confidence import WeightVector, confidence_value
from trajectory_repair_toolkit.exceptions import ConfigError, ValidationError
from trajectory_repair_toolkit.features import ZSCORE_FEATURES, FeatureVector, NormalizationStats
from trajectory_repair_toolkit.genetic import (
    GaConfig,
    Individual,
    TrainingSet,
    build_training_set,
    crossover,
    evolve,
    fitness,
    mutate,
)


def _random_training_set(rng, size, weights=None):
    features = rng.uniform(0.0, 1.0, (size, 9))
    features[:, :2] = rng.integers(0, 2, (size, 2))
    if weights is None:
        ground_truth = rng.uniform(0.0, 1.0, size)
    else:
        ground_truth = np.array([confidence_value(FeatureVector(tuple(row)), weights) for row in features])
    return TrainingSet(features, np.clip(ground_truth, 0.0, 1.0))


def test_fitness_matches_brute_force():
    rng = np.random.default_rng(1)
    train = _random_training_set(rng, 20)
    weights = WeightVector.from_array(rng.dirichlet(np.ones(9)))

    expected = 0.0
    for row, gt in zip(train.features, train.ground_truth):
        expected += abs(gt - confidence_value(FeatureVector(tuple(row)), weights))

    assert fitness(weights, train) == pytest.approx(expected, abs=1e-12)
    assert fitness(weights.as_array(), train) == pytest.approx(expected, abs=1e-12)


def test_operators_keep_weights_normalized():
    rng = np.random.default_rng(2)
    a = Individual(rng.dirichlet(np.ones(9)))
    b = Individual(rng.dirichlet(np.ones(9)))

    for _ in range(5000):
        a = mutate(a, rng)
        b, a = crossover(a, b, rng)
        for individual in (a, b):
            assert abs(individual.weights.sum() - 1.0) <= 1e-9
            assert np.all(individual.weights >= 0)


def test_crossover_of_identical_parents():
    rng = np.random.default_rng(3)
    parent = Individual(rng.dirichlet(np.ones(9)))
    for position in range(9):
        child_a, child_b = crossover(parent, Individual(parent.weights.copy()), rng, position=position)
        np.testing.assert_allclose(child_a.weights, parent.weights)
        np.testing.assert_allclose(child_b.weights, parent.weights)


def test_crossover_with_all_zero_suffix_keeps_parent():
    a = Individual(np.array([0.5, 0.5, 0, 0, 0, 0, 0, 0, 0], dtype=np.float64))
    b = Individual(np.array([0, 0, 0, 0, 0, 0, 0, 0.5, 0.5], dtype=np.float64))
    child_a, child_b = crossover(a, b, np.random.default_rng(0), position=2)
    np.testing.assert_allclose(child_a.weights, [0.25, 0.25, 0, 0, 0, 0, 0, 0.25, 0.25])
    np.testing.assert_allclose(child_b.weights, b.weights)  # all-zero: own parent


def test_mutation_preserves_prefix_ratios():
    rng = np.random.default_rng(4)
    parent = Individual(rng.dirichlet(np.ones(9)))
    child = mutate(parent, rng, position=4)

    np.testing.assert_allclose(child.weights[:4] / child.weights[0], parent.weights[:4] / parent.weights[0])
    assert parent.weights.sum() == pytest.approx(1.0)  # unmodified


def test_evolve_is_deterministic():
    train = _random_training_set(np.random.default_rng(5), 50)
    config = GaConfig(population_size=60, max_generations=15, elite_count=4, rng_seed=42, fitness_threshold=0.0)

    first = evolve(train, config)
    second = evolve(train, config)
    assert first.history == second.history
    assert first.best == second.best
    assert first.generations == 15
    assert not first.converged


def test_best_fitness_never_increases():
    train = _random_training_set(np.random.default_rng(6), 80)
    result = evolve(train, GaConfig(population_size=100, max_generations=30, elite_count=5, fitness_threshold=0.0))
    assert len(result.history) == 31
    assert all(later <= earlier + 1e-9 for earlier, later in zip(result.history, result.history[1:]))
    assert result.best_fitness == result.history[-1]
    assert fitness(result.best, train) == pytest.approx(result.best_fitness)


def test_final_elites_carry_their_fitness():
    train = _random_training_set(np.random.default_rng(8), 40)
    result = evolve(train, GaConfig(population_size=50, max_generations=5, elite_count=6, fitness_threshold=0.0))

    assert len(result.elites) == 6
    assert result.elites[0].fitness == result.best_fitness
    np.testing.assert_allclose(result.elites[0].weights, result.best.as_array())
    fitness_values = [individual.fitness for individual in result.elites]
    assert fitness_values == sorted(fitness_values)
    for individual in result.elites:
        assert individual.fitness == pytest.approx(fitness(individual.weights, train))


def test_individual_evaluation():
    train = _random_training_set(np.random.default_rng(9), 30)
    individual = Individual(np.full(9, 1.0 / 9.0))
    assert individual.fitness is None

    assert individual.evaluate(train) == pytest.approx(fitness(WeightVector.uniform(), train))
    assert individual.fitness == pytest.approx(fitness(WeightVector.uniform(), train))

    # Offspring are unevaluated
    rng = np.random.default_rng(10)
    assert mutate(individual, rng).fitness is None
    assert all(child.fitness is None for child in crossover(individual, individual, rng))


def test_evolve_without_generations():
    train = _random_training_set(np.random.default_rng(7), 10)
    result = evolve(train, GaConfig(population_size=20, max_generations=0, elite_count=2))
    assert result.generations == 0
    assert len(result.history) == 1


def test_evolve_rejects_empty_training_set():
    with pytest.raises(ValidationError):
        evolve(TrainingSet(np.zeros((0, 9)), np.zeros(0)))


@pytest.mark.parametrize("options", [
    {'mutation_prob': 1.5},
    {'crossover_prob': -0.1},
    {'population_size': 1},
    {'elite_count': 0},
    {'max_generations': -1},
])
def test_ga_config_errors(options):
    with pytest.raises(ConfigError):
        GaConfig(**options)


def test_ga_config_from_mapping_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        GaConfig.from_mapping({'populationsize': 10})


@pytest.mark.slow
def test_recovers_hidden_weights():
    hidden = WeightVector((0.3, 0.1, 0.05, 0.05, 0.2, 0.1, 0.05, 0.1, 0.05))
    train = _random_training_set(np.random.default_rng(8), 300, weights=hidden)

    result = evolve(train, GaConfig(population_size=500, max_generations=200, elite_count=20, rng_seed=9))
    assert result.best_fitness < 0.05 * len(train)
    assert result.converged


def _stats():
    return NormalizationStats(mu=dict.fromkeys(ZSCORE_FEATURES, 0.0), sigma=dict.fromkeys(ZSCORE_FEATURES, 1.0),
                              count=1)


def test_build_training_set(corridor_scene, make_trajectory):
    late = make_trajectory("late", [(5.0, 1.0, 5.0), (6.0, 2.0, 5.0)])
    early = make_trajectory("early", [(1.0, 1.0, 5.0), (2.0, 2.0, 5.0)])
    middle = make_trajectory("middle", [(3.0, 1.0, 5.0), (4.0, 2.0, 5.0)])
    unannotated = make_trajectory("unannotated", [(0.0, 1.0, 5.0), (1.0, 2.0, 5.0)])
    ground_truth = {"late": 0.9, "early": 0.1, "middle": 0.65}

    train = build_training_set([late, early, middle, unannotated], ground_truth, corridor_scene, _stats(),
                               train_size=2)
    assert len(train) == 2
    np.testing.assert_allclose(train.ground_truth, [0.1, 0.65])
    assert np.all(train.features[:, 0] == 1.0)  # all start in the entry zone


def test_training_set_validation():
    with pytest.raises(ValidationError):
        TrainingSet(np.zeros((2, 9)), np.array([0.5]))
    with pytest.raises(ValidationError):
        TrainingSet(np.zeros((1, 9)), np.array([1.5]))


def test_crossover_from_first_position_swaps_parents():
    rng = np.random.default_rng(6)
    a = Individual(rng.dirichlet(np.ones(9)))
    b = Individual(rng.dirichlet(np.ones(9)))
    child_a, child_b = crossover(a, b, rng, position=0)
    np.testing.assert_allclose(child_a.weights, b.weights)
    np.testing.assert_allclose(child_b.weights, a.weights)
