"""Genetic-algorithm engine over pixel-index chromosomes.

Individuals are sets of distinct pixel indices; fitness is the simplex
volume those pixels span in the reduced space. The engine provides the
classic loop (tournament selection, two-point crossover, per-gene mutation,
elitism) plus an in-vitro-fertilisation step that recombines the population
with the current fittest individual and inserts only improving children.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .core import Chromosome

BatchFitness = Callable[[np.ndarray], np.ndarray]
FitnessFn = Callable[[Tuple[int, ...]], float]


@dataclass(frozen=True)
class GaConfig:
    """Knobs of one GA run. mutation_prob and crossover_prob are the
    per-gene and per-pair application probabilities."""

    population_size: int
    generations: int
    mutation_prob: float
    crossover_prob: float
    tournament_size: int = 3
    elite_count: int = 1
    ivfm_enabled: bool = False
    vca_seed_enabled: bool = False
    rng_seed: int = 0

    def __post_init__(self):
        if self.population_size < 1:
            raise ValueError("population_size must be >= 1")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        if not 0.0 <= self.mutation_prob <= 1.0:
            raise ValueError("mutation_prob must be in [0, 1]")
        if not 0.0 <= self.crossover_prob <= 1.0:
            raise ValueError("crossover_prob must be in [0, 1]")
        if not 1 <= self.tournament_size <= self.population_size:
            raise ValueError("tournament_size must be in [1, population_size]")
        if not 0 <= self.elite_count < self.population_size:
            raise ValueError("elite_count must be in [0, population_size)")


@dataclass
class Population:
    """A generation of chromosomes plus running statistics of the evolution."""

    individuals: List[Chromosome]
    generation: int = 0
    best_ever: Optional[Chromosome] = None
    fitness_history: List[float] = field(default_factory=list)
    mean_history: List[float] = field(default_factory=list)


def _require_evaluated(individuals: Sequence[Chromosome]) -> None:
    if any(c.fitness is None for c in individuals):
        raise ValueError("population has unevaluated individuals")


def _top_indices(individuals: Sequence[Chromosome], k: int) -> List[int]:
    # Fitness descending, population index ascending on ties.
    return sorted(range(len(individuals)), key=lambda i: (-individuals[i].fitness, i))[:k]


def init_population(
    n_pixels: int,
    p: int,
    config: GaConfig,
    rng: Optional[np.random.Generator] = None,
    seed_genes: Optional[Sequence[int]] = None,
) -> Population:
    """Create the starting population: distinct pixel indices sampled
    uniformly without replacement per individual.

    With config.vca_seed_enabled, individual 0 is replaced by the supplied
    seed_genes (the caller runs VCA and passes its source indices in).
    """
    if p < 2:
        raise ValueError("p >= 2 required")
    if n_pixels < p:
        raise ValueError("need at least p pixels (%d < %d)" % (n_pixels, p))
    if rng is None:
        rng = np.random.default_rng(config.rng_seed)
    individuals = [
        Chromosome(tuple(int(g) for g in rng.choice(n_pixels, size=p, replace=False)))
        for _ in range(config.population_size)
    ]
    if config.vca_seed_enabled:
        if seed_genes is None:
            raise ValueError("vca_seed_enabled requires seed genes from the caller")
        individuals[0] = Chromosome(tuple(int(g) for g in seed_genes))
    return Population(individuals=individuals)


def tournament_select(
    individuals: Sequence[Chromosome],
    tournament_size: int,
    rng: np.random.Generator,
) -> Chromosome:
    """Draw tournament_size entrants with replacement and return a copy of
    the fittest; ties go to the lowest population index."""
    if not individuals:
        raise ValueError("empty population")
    _require_evaluated(individuals)
    draws = rng.integers(0, len(individuals), size=tournament_size)
    best = None
    for i in draws:
        i = int(i)
        if (
            best is None
            or individuals[i].fitness > individuals[best].fitness
            or (individuals[i].fitness == individuals[best].fitness and i < best)
        ):
            best = i
    return individuals[best].copy()


def _repair(genes: List[int], n_pixels: int, rng: np.random.Generator) -> None:
    """Replace duplicate genes in place with uniform draws over unused pixels."""
    used = set()
    dup_slots = []
    for k, g in enumerate(genes):
        if g in used:
            dup_slots.append(k)
        else:
            used.add(g)
    for k in dup_slots:
        g = int(rng.integers(0, n_pixels))
        while g in used:
            g = int(rng.integers(0, n_pixels))
        genes[k] = g
        used.add(g)


def two_point_crossover(
    a: Chromosome,
    b: Chromosome,
    crossover_prob: float,
    n_pixels: int,
    rng: np.random.Generator,
) -> Tuple[Chromosome, Chromosome]:
    """Swap a random gene segment between two parents.

    With probability crossover_prob, cut points 0 <= i < j <= p are drawn
    uniformly over distinct pairs and the [i, j) segments are exchanged;
    otherwise the parents are returned as copies. Children with duplicated
    genes are repaired by resampling unused pixel indices, so chromosome
    validity is preserved. Unchanged children keep their parent's cached
    fitness.
    """
    if len(a.genes) != len(b.genes):
        raise ValueError("parents must have equal gene length")
    p = len(a.genes)
    if rng.random() >= crossover_prob or p < 2:
        return a.copy(), b.copy()
    i = int(rng.integers(0, p + 1))
    j = int(rng.integers(0, p))
    if j >= i:
        j += 1
    else:
        i, j = j, i
    ga, gb = list(a.genes), list(b.genes)
    ga[i:j], gb[i:j] = gb[i:j], ga[i:j]
    _repair(ga, n_pixels, rng)
    _repair(gb, n_pixels, rng)
    ta, tb = tuple(ga), tuple(gb)
    child_a = Chromosome(ta, a.fitness if ta == a.genes else None)
    child_b = Chromosome(tb, b.fitness if tb == b.genes else None)
    return child_a, child_b


def mutate(
    c: Chromosome,
    mutation_prob: float,
    n_pixels: int,
    rng: np.random.Generator,
) -> Chromosome:
    """Per gene, with probability mutation_prob, substitute a uniformly
    drawn pixel index not currently in the chromosome.

    When every pixel is already in the chromosome (n_pixels == p) there is
    nothing to draw and the gene is left alone. Untouched chromosomes keep
    their cached fitness.
    """
    p = len(c.genes)
    flips = rng.random(p) < mutation_prob
    if not flips.any():
        return c.copy()
    genes = list(c.genes)
    used = set(genes)
    changed = False
    for k in range(p):
        if not flips[k] or len(used) >= n_pixels:
            continue
        g = int(rng.integers(0, n_pixels))
        while g in used:
            g = int(rng.integers(0, n_pixels))
        used.remove(genes[k])
        used.add(g)
        genes[k] = g
        changed = True
    return Chromosome(tuple(genes), None if changed else c.fitness)


def ivfm_step(
    individuals: Sequence[Chromosome],
    n_pixels: int,
    rng: np.random.Generator,
    evaluate: Callable[[List[Chromosome]], None],
    elite_count: int = 1,
) -> List[Chromosome]:
    """Recombine the population with its fittest individual ("father") and
    keep only improving children.

    The first half of the population (in order) exchanges segments pairwise
    with forced two-point crossover; every result is then crossed with the
    father, and each child that strictly beats the current worst non-elite
    resident takes its place. If no child improves on any resident the
    population comes back untouched.
    """
    npop = len(individuals)
    if npop == 0:
        raise ValueError("empty population")
    _require_evaluated(individuals)
    father_idx = _top_indices(individuals, 1)[0]
    father = individuals[father_idx]

    half = npop // 2
    chosen = list(individuals[:half])
    recombined: List[Chromosome] = []
    for i in range(0, half - 1, 2):
        c1, c2 = two_point_crossover(chosen[i], chosen[i + 1], 1.0, n_pixels, rng)
        recombined.extend((c1, c2))
    if half % 2 == 1:
        recombined.append(chosen[-1].copy())

    children: List[Chromosome] = []
    for member in recombined:
        s1, s2 = two_point_crossover(member, father, 1.0, n_pixels, rng)
        children.extend((s1, s2))
    evaluate(children)

    protected = set(_top_indices(individuals, elite_count))
    open_slots = [i for i in range(npop) if i not in protected]
    result = list(individuals)
    changed = False
    for child in children:
        if not open_slots:
            break
        j = min(open_slots, key=lambda i: (result[i].fitness, i))
        if child.fitness > result[j].fitness:
            result[j] = child
            changed = True
    return result if changed else list(individuals)


def evolve(
    n_pixels: int,
    p: int,
    config: GaConfig,
    fitness_fn: FitnessFn,
    batch_fitness: Optional[BatchFitness] = None,
    seed_genes: Optional[Sequence[int]] = None,
) -> Population:
    """Run the full GA and return the final population.

    Each generation: tournament selection feeds two-point crossover and
    mutation until a full offspring pool exists, the IVF step runs when
    enabled, and the elite_count best of the previous generation replace the
    worst offspring. The returned population carries best_ever plus the
    per-generation best/mean fitness histories (index 0 is the initial
    population). Everything is driven by one seeded generator, so identical
    inputs reproduce identical results.

    batch_fitness, when given, maps a (k, p) index array to k volumes and is
    used instead of fitness_fn for bulk evaluation; the two must agree.
    """

    rng = np.random.default_rng(config.rng_seed)

    def evaluate(chroms: List[Chromosome]) -> None:
        pending = [c for c in chroms if c.fitness is None]
        if not pending:
            return
        if batch_fitness is not None:
            genes = np.array([c.genes for c in pending], dtype=np.intp)
            for c, v in zip(pending, batch_fitness(genes)):
                c.fitness = float(v)
        else:
            for c in pending:
                c.fitness = float(fitness_fn(c.genes))

    pop = init_population(n_pixels, p, config, rng, seed_genes)
    individuals = pop.individuals
    evaluate(individuals)

    best_ever = individuals[_top_indices(individuals, 1)[0]].copy()
    history = [best_ever.fitness]
    mean_history = [float(np.mean([c.fitness for c in individuals]))]

    for _ in range(config.generations):
        elites = [individuals[i].copy() for i in _top_indices(individuals, config.elite_count)]
        offspring: List[Chromosome] = []
        while len(offspring) < len(individuals):
            pa = tournament_select(individuals, config.tournament_size, rng)
            pb = tournament_select(individuals, config.tournament_size, rng)
            c1, c2 = two_point_crossover(pa, pb, config.crossover_prob, n_pixels, rng)
            offspring.append(mutate(c1, config.mutation_prob, n_pixels, rng))
            if len(offspring) < len(individuals):
                offspring.append(mutate(c2, config.mutation_prob, n_pixels, rng))
        evaluate(offspring)
        if config.ivfm_enabled:
            offspring = ivfm_step(offspring, n_pixels, rng, evaluate, config.elite_count)
        if elites:
            worst = sorted(
                range(len(offspring)), key=lambda i: (offspring[i].fitness, i)
            )[: len(elites)]
            for slot, elite in zip(worst, elites):
                offspring[slot] = elite
        individuals = offspring
        gen_best = individuals[_top_indices(individuals, 1)[0]]
        if gen_best.fitness > best_ever.fitness:
            best_ever = gen_best.copy()
        history.append(gen_best.fitness)
        mean_history.append(float(np.mean([c.fitness for c in individuals])))

    return Population(
        individuals=individuals,
        generation=config.generations,
        best_ever=best_ever,
        fitness_history=history,
        mean_history=mean_history,
    )
