"""GA operator contracts: selection, crossover, mutation, IVFm, evolve."""

import itertools
import math

import numpy as np
import pytest

from unmix import (
    Chromosome,
    GaConfig,
    evolve,
    generate_endmembers,
    init_population,
    ivfm_step,
    mix64,
    mutate,
    pca_reduce,
    simplex_volume,
    tournament_select,
    two_point_crossover,
)
from unmix import SpectralCube, chromosome_volumes


class ScriptRng:
    """Replays a fixed transcript of integer and uniform draws."""

    def __init__(self, ints=(), floats=()):
        self._ints = list(ints)
        self._floats = list(floats)

    def integers(self, low, high, size=None):
        if size is None:
            return self._ints.pop(0)
        return np.array([self._ints.pop(0) for _ in range(size)])

    def random(self, size=None):
        if size is None:
            return self._floats.pop(0)
        return np.array([self._floats.pop(0) for _ in range(size)])


def base_config(**kw):
    defaults = dict(population_size=10, generations=5, mutation_prob=0.1, crossover_prob=1.0)
    defaults.update(kw)
    return GaConfig(**defaults)


def test_gaconfig_validation():
    with pytest.raises(ValueError, match="population_size"):
        base_config(population_size=0)
    with pytest.raises(ValueError, match="generations"):
        base_config(generations=-1)
    with pytest.raises(ValueError, match="mutation_prob"):
        base_config(mutation_prob=1.5)
    with pytest.raises(ValueError, match="crossover_prob"):
        base_config(crossover_prob=-0.1)
    with pytest.raises(ValueError, match="tournament_size"):
        base_config(tournament_size=11)
    with pytest.raises(ValueError, match="elite_count"):
        base_config(elite_count=10)


def test_init_population_full_permutation_when_n_equals_p():
    pop = init_population(4, 4, base_config(population_size=6))
    for c in pop.individuals:
        assert sorted(c.genes) == [0, 1, 2, 3]


def test_init_population_deterministic():
    cfg = base_config(population_size=20)
    a = init_population(100, 5, cfg)
    b = init_population(100, 5, cfg)
    assert [c.genes for c in a.individuals] == [c.genes for c in b.individuals]


def test_init_population_validity_scan():
    cfg = base_config(population_size=100)
    pop = init_population(1000, 5, cfg)
    assert len(pop.individuals) == 100
    for c in pop.individuals:
        assert len(set(c.genes)) == 5
        assert all(0 <= g < 1000 for g in c.genes)


def test_init_population_errors():
    with pytest.raises(ValueError, match="p >= 2"):
        init_population(10, 1, base_config())
    with pytest.raises(ValueError, match="at least p"):
        init_population(3, 4, base_config())


def test_init_population_vca_seed():
    cfg = base_config(vca_seed_enabled=True)
    pop = init_population(50, 3, cfg, seed_genes=(7, 2, 9))
    assert pop.individuals[0].genes == (7, 2, 9)
    with pytest.raises(ValueError, match="seed genes"):
        init_population(50, 3, cfg)


def evaluated(gene_sets, fitnesses):
    return [Chromosome(g, float(f)) for g, f in zip(gene_sets, fitnesses)]


def test_tournament_single_individual():
    pop = evaluated([(0, 1)], [5.0])
    pick = tournament_select(pop, 1, np.random.default_rng(0))
    assert pick.genes == (0, 1)


def test_tournament_containing_best_returns_best():
    pop = evaluated([(0, 1), (2, 3), (4, 5)], [1.0, 9.0, 3.0])
    rng = ScriptRng(ints=[0, 1, 2])  # draw includes index 1, the global best
    pick = tournament_select(pop, 3, rng)
    assert pick.genes == (2, 3)


def test_tournament_tie_goes_to_lowest_index():
    pop = evaluated([(0, 1), (2, 3), (4, 5)], [7.0, 7.0, 1.0])
    rng = ScriptRng(ints=[1, 0, 2])
    pick = tournament_select(pop, 3, rng)
    assert pick.genes == (0, 1)


def test_tournament_selection_frequency_matches_analytic_rate():
    # With-replacement size-3 tournaments over fitnesses (1, 2, 3): the best
    # individual wins unless all three draws miss it, so P = 1 - (2/3)**3.
    pop = evaluated([(0, 1), (2, 3), (4, 5)], [1.0, 2.0, 3.0])
    rng = np.random.default_rng(42)
    wins = sum(
        tournament_select(pop, 3, rng).genes == (4, 5) for _ in range(10000)
    )
    assert abs(wins / 10000 - (1 - (2 / 3) ** 3)) < 0.02


def test_tournament_returns_copy():
    pop = evaluated([(0, 1)], [5.0])
    pick = tournament_select(pop, 1, np.random.default_rng(0))
    assert pick is not pop[0]


def test_crossover_prob_zero_copies_parents():
    a, b = Chromosome((1, 2, 3), 4.0), Chromosome((4, 5, 6), 7.0)
    c1, c2 = two_point_crossover(a, b, 0.0, 100, np.random.default_rng(0))
    assert c1.genes == a.genes and c2.genes == b.genes
    assert c1.fitness == 4.0 and c2.fitness == 7.0


def test_crossover_identical_parents_unchanged():
    a = Chromosome((1, 2, 3, 4), 2.0)
    b = Chromosome((1, 2, 3, 4), 2.0)
    c1, c2 = two_point_crossover(a, b, 1.0, 100, np.random.default_rng(5))
    assert c1.genes == (1, 2, 3, 4) and c2.genes == (1, 2, 3, 4)
    assert c1.fitness == 2.0  # unchanged children keep cached fitness


def test_crossover_hand_trace():
    # Scripted draws: first integer pair (1, 2) maps to cut points (1, 3),
    # so the [1, 3) segment is exchanged.
    a, b = Chromosome((1, 2, 3, 4)), Chromosome((5, 6, 7, 8))
    rng = ScriptRng(ints=[1, 2], floats=[0.0])
    c1, c2 = two_point_crossover(a, b, 1.0, 100, rng)
    assert c1.genes == (1, 6, 7, 4)
    assert c2.genes == (5, 2, 3, 8)


def test_crossover_repairs_duplicates():
    rng = np.random.default_rng(31)
    a, b = Chromosome((0, 1, 2, 3)), Chromosome((2, 3, 4, 5))
    for _ in range(200):
        c1, c2 = two_point_crossover(a, b, 1.0, 10, rng)
        for c in (c1, c2):
            assert len(set(c.genes)) == 4
            assert all(0 <= g < 10 for g in c.genes)


def test_mutate_prob_zero_is_identity():
    c = Chromosome((3, 1, 4), 9.0)
    out = mutate(c, 0.0, 100, np.random.default_rng(0))
    assert out.genes == c.genes and out.fitness == 9.0


def test_mutate_skips_when_no_unused_pixels():
    c = Chromosome((0, 1, 2), 5.0)
    out = mutate(c, 1.0, 3, np.random.default_rng(0))
    assert out.genes == (0, 1, 2)
    assert out.fitness == 5.0


def test_mutate_always_changes_flipped_slot():
    rng = np.random.default_rng(77)
    original = (10, 20, 30, 40)
    for _ in range(300):
        out = mutate(Chromosome(original), 1.0, 500, rng)
        assert all(out.genes[k] != original[k] for k in range(4))
        assert len(set(out.genes)) == 4


def test_mutate_full_replacement_frequency():
    # pm = 1, N >> p: the new gene set is disjoint from the original with
    # probability about (1 - p/N)**p; allow Monte Carlo slack.
    rng = np.random.default_rng(101)
    original = (10, 20, 30, 40)
    n, p, trials = 500, 4, 1000
    disjoint = 0
    for _ in range(trials):
        out = mutate(Chromosome(original), 1.0, n, rng)
        disjoint += not (set(out.genes) & set(original))
    assert disjoint / trials >= (1 - p / n) ** p - 0.03


def test_ivfm_non_interference_when_no_child_improves():
    # All individuals identical: every child equals the father, never
    # strictly better, so the step must hand back the same individuals.
    pop = evaluated([(0, 1, 2)] * 4, [5.0] * 4)
    out = ivfm_step(pop, 30, np.random.default_rng(3), lambda cs: None)
    assert all(r is o for r, o in zip(out, pop))


def test_ivfm_never_decreases_best():
    rng = np.random.default_rng(202)

    def fit(genes):
        return float(sum(math.sin(g * 0.7) for g in genes))

    def ev(chroms):
        for c in chroms:
            if c.fitness is None:
                c.fitness = fit(c.genes)

    for _ in range(50):
        genes = [tuple(rng.choice(40, size=3, replace=False)) for _ in range(8)]
        pop = [Chromosome(g, fit(g)) for g in genes]
        before = max(c.fitness for c in pop)
        out = ivfm_step(pop, 40, rng, ev)
        assert max(c.fitness for c in out) >= before


def test_ivfm_hand_simulation_trace():
    # npop=4, father is index 1 with fitness 12 (fitness = sum of genes).
    # half=2, so individuals 0 and 1 cross pairwise, then each result
    # crosses the father. Scripted cuts:
    #   pair crossover: draws (1, 1) -> cuts (1, 2): (0,1,2)x(3,4,5) ->
    #     (0,4,2) and (3,1,5)
    #   (0,4,2) x father: draws (0, 2) -> cuts (0, 3): full swap ->
    #     (3,4,5), (0,4,2)
    #   (3,1,5) x father: draws (2, 0) -> swapped to cuts (0, 2) ->
    #     (3,4,5), (3,1,5)
    # Children fitnesses 12, 6, 12, 9; elite slot {1} protected. Child 12
    # replaces slot 0 (fit 3), child 6 cannot beat slot 2 (fit 6), second 12
    # replaces slot 2, child 9 cannot beat slot 3 (fit 9).
    pop = evaluated([(0, 1, 2), (3, 4, 5), (0, 2, 4), (1, 3, 5)], [3.0, 12.0, 6.0, 9.0])
    rng = ScriptRng(ints=[1, 1, 0, 2, 2, 0], floats=[0.0, 0.0, 0.0])

    def ev(chroms):
        for c in chroms:
            if c.fitness is None:
                c.fitness = float(sum(c.genes))

    out = ivfm_step(pop, 6, rng, ev, elite_count=1)
    assert [c.genes for c in out] == [(3, 4, 5), (3, 4, 5), (3, 4, 5), (1, 3, 5)]
    assert [c.fitness for c in out] == [12.0, 12.0, 12.0, 9.0]


def test_evolve_zero_generations_returns_initial_best():
    def fit(genes):
        return float(sum(genes))

    cfg = base_config(population_size=8, generations=0, rng_seed=4)
    pop = evolve(30, 3, cfg, fit)
    assert len(pop.fitness_history) == 1
    assert len(pop.mean_history) == 1
    assert pop.best_ever.fitness == max(c.fitness for c in pop.individuals)
    assert pop.generation == 0


def test_evolve_history_monotone_with_elitism():
    def fit(genes):
        return float(sum(math.sin(0.3 * g) for g in genes))

    cfg = base_config(population_size=12, generations=25, rng_seed=9, elite_count=1)
    pop = evolve(30, 3, cfg, fit)
    hist = pop.fitness_history
    assert len(hist) == 26
    assert all(hist[k + 1] >= hist[k] for k in range(25))
    assert pop.best_ever.fitness == hist[-1]


def test_evolve_deterministic():
    def fit(genes):
        return float(sum(math.cos(g) for g in genes))

    cfg = base_config(population_size=10, generations=15, rng_seed=77)
    a = evolve(40, 4, cfg, fit)
    b = evolve(40, 4, cfg, fit)
    assert [c.genes for c in a.individuals] == [c.genes for c in b.individuals]
    assert a.fitness_history == b.fitness_history


def test_evolve_batch_fitness_equivalent_to_scalar():
    rng = np.random.default_rng(66)
    data = rng.normal(size=(2, 25))

    def scalar(genes):
        return simplex_volume(data[:, list(genes)])

    def batch(gene_array):
        return chromosome_volumes(data, gene_array)

    cfg = base_config(population_size=10, generations=12, rng_seed=3)
    a = evolve(25, 3, cfg, scalar)
    b = evolve(25, 3, cfg, scalar, batch_fitness=batch)
    assert [c.genes for c in a.individuals] == [c.genes for c in b.individuals]
    assert a.fitness_history == pytest.approx(b.fitness_history, rel=1e-10)


def test_evolve_finds_exhaustive_maximum_on_tiny_cube():
    # 12 pixels, 3 endmembers, pure pixels present: C(12,3) = 220 candidate
    # simplexes, enumerated exactly.
    rng = np.random.default_rng(mix64(500, 0))
    m = generate_endmembers(3, 20, seed=mix64(500, 1)).spectra
    a = rng.dirichlet(np.ones(3), size=12).T
    a[:, :3] = np.eye(3)
    cube = SpectralCube(m @ a)
    red = pca_reduce(cube, 2)
    combos = list(itertools.combinations(range(12), 3))
    vmax = float(np.max(chromosome_volumes(red.data, combos)))

    def batch(gene_array):
        return chromosome_volumes(red.data, np.sort(gene_array, axis=1))

    def scalar(genes):
        return float(chromosome_volumes(red.data, [tuple(sorted(genes))])[0])

    for seed in (0, 1, 2, 3, 4):
        cfg = GaConfig(
            population_size=30, generations=50, mutation_prob=0.1,
            crossover_prob=1.0, rng_seed=seed,
        )
        pop = evolve(12, 3, cfg, scalar, batch_fitness=batch)
        assert pop.best_ever.fitness == vmax


def test_evolve_ivfm_enabled_runs_and_improves():
    def fit(genes):
        return float(sum(genes))

    cfg = base_config(population_size=9, generations=30, rng_seed=1, ivfm_enabled=True)
    pop = evolve(40, 3, cfg, fit)
    assert pop.fitness_history[-1] > pop.fitness_history[0]
    hist = pop.fitness_history
    assert all(hist[k + 1] >= hist[k] for k in range(len(hist) - 1))
