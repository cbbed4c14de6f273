"""NSGA-II search over policy schedules.

Two objectives, both minimized internally: total deaths and the negated
mobility AUC. The ICU-capacity constraint is handled by constrained
domination (feasible beats infeasible, smaller violation beats larger).
Variation uses real-coded simulated-binary crossover and polynomial
mutation with clipping to the genome bounds.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import strategy
from .errors import InvalidParameterError

GENOME_LOW = 0.0
GENOME_HIGH = 100.0


@dataclass
class Individual:
    genome: np.ndarray
    objectives: tuple | None = None
    constraint_violation: float = 0.0
    rank: int | None = None
    crowding: float = 0.0

    @property
    def feasible(self) -> bool:
        return self.constraint_violation == 0.0


@dataclass(frozen=True)
class SearchConfig:
    population_size: int = 100
    generations: int = 100
    crossover_eta: float = 15.0
    crossover_prob: float = 0.9
    mutation_eta: float = 20.0
    mutation_prob: float | None = None  # defaults to 1/n_genes
    seed: int = 0
    inject_canned: bool = True

    def __post_init__(self):
        if self.population_size % 2 != 0 or self.population_size < 2:
            raise InvalidParameterError("population_size must be even and >= 2")
        for p in (self.crossover_prob, self.mutation_prob):
            if p is not None and not 0.0 <= p <= 1.0:
                raise InvalidParameterError("probabilities must be in [0, 1]")


@dataclass
class ParetoFront:
    solutions: list  # of Individual
    hypervolume_log: list = field(default_factory=list)
    feasible_found: bool = True

    def to_json(self) -> str:
        return json.dumps(
            {
                "solutions": [
                    {
                        "genome": ind.genome.tolist(),
                        "objectives": list(ind.objectives),
                        "constraint_violation": ind.constraint_violation,
                        "feasible": ind.feasible,
                    }
                    for ind in self.solutions
                ],
                "hypervolume_log": self.hypervolume_log,
                "feasible_found": self.feasible_found,
            }
        )

    def to_csv(self) -> str:
        lines = ["deaths,neg_mobility_auc,feasible," + ",".join(
            f"g{j}" for j in range(len(self.solutions[0].genome))
        )] if self.solutions else ["deaths,neg_mobility_auc,feasible"]
        for ind in self.solutions:
            lines.append(
                f"{ind.objectives[0]},{ind.objectives[1]},{int(ind.feasible)},"
                + ",".join(str(g) for g in ind.genome)
            )
        return "\n".join(lines) + "\n"


def dominates(a: Individual, b: Individual) -> bool:
    """Constrained Pareto domination for minimization."""
    if a.constraint_violation != b.constraint_violation:
        return a.constraint_violation < b.constraint_violation
    if a.constraint_violation > 0.0:
        # Equally infeasible solutions are mutually non-dominated.
        return False
    at_least_as_good = all(x <= y for x, y in zip(a.objectives, b.objectives))
    strictly_better = any(x < y for x, y in zip(a.objectives, b.objectives))
    return at_least_as_good and strictly_better


def non_dominated_sort(population) -> list:
    """Fronts of indices, best first (fast non-dominated sort)."""
    n = len(population)
    dominated_by = [[] for _ in range(n)]
    domination_count = [0] * n
    fronts = [[]]
    for p in range(n):
        for q in range(n):
            if p == q:
                continue
            if dominates(population[p], population[q]):
                dominated_by[p].append(q)
            elif dominates(population[q], population[p]):
                domination_count[p] += 1
        if domination_count[p] == 0:
            population[p].rank = 0
            fronts[0].append(p)
    i = 0
    while fronts[i]:
        nxt = []
        for p in fronts[i]:
            for q in dominated_by[p]:
                domination_count[q] -= 1
                if domination_count[q] == 0:
                    population[q].rank = i + 1
                    nxt.append(q)
        i += 1
        fronts.append(nxt)
    fronts.pop()
    return fronts


def crowding_distance(front_objectives) -> np.ndarray:
    """Per-point diversity: sum over objectives of normalized neighbor gaps.

    Boundary points per objective get infinite distance.
    """
    objs = np.asarray(front_objectives, dtype=float)
    n = len(objs)
    dist = np.zeros(n)
    if n <= 2:
        return np.full(n, math.inf)
    for k in range(objs.shape[1]):
        order = np.argsort(objs[:, k], kind="stable")
        span = objs[order[-1], k] - objs[order[0], k]
        dist[order[0]] = dist[order[-1]] = math.inf
        if span == 0:
            continue
        for i in range(1, n - 1):
            dist[order[i]] += (objs[order[i + 1], k] - objs[order[i - 1], k]) / span
    return dist


def tournament_select(population, rng, n_pairs=None):
    """Binary tournaments: lower rank wins, then larger crowding, then coin flip.

    Returns index pairs of selected parents.
    """
    n = len(population)
    if n_pairs is None:
        n_pairs = n // 2

    def tourney():
        a, b = rng.integers(0, n), rng.integers(0, n)
        pa, pb = population[a], population[b]
        if pa.rank != pb.rank:
            return a if pa.rank < pb.rank else b
        if pa.crowding != pb.crowding:
            return a if pa.crowding > pb.crowding else b
        return a if rng.random() < 0.5 else b

    return [(tourney(), tourney()) for _ in range(n_pairs)]


def sbx_crossover(p1, p2, eta, prob, rng, low=GENOME_LOW, high=GENOME_HIGH):
    """Bounded simulated-binary crossover on one parent pair."""
    c1, c2 = p1.copy(), p2.copy()
    if rng.random() > prob:
        return c1, c2
    for j in range(len(p1)):
        if rng.random() > 0.5:
            continue
        x1, x2 = min(p1[j], p2[j]), max(p1[j], p2[j])
        if x2 - x1 < 1e-14:
            continue
        u = rng.random()
        beta = 1.0 + 2.0 * (x1 - low) / (x2 - x1)
        alpha = 2.0 - beta ** -(eta + 1.0)
        if u <= 1.0 / alpha:
            beta_q = (u * alpha) ** (1.0 / (eta + 1.0))
        else:
            beta_q = (1.0 / (2.0 - u * alpha)) ** (1.0 / (eta + 1.0))
        child1 = 0.5 * (x1 + x2 - beta_q * (x2 - x1))

        beta = 1.0 + 2.0 * (high - x2) / (x2 - x1)
        alpha = 2.0 - beta ** -(eta + 1.0)
        if u <= 1.0 / alpha:
            beta_q = (u * alpha) ** (1.0 / (eta + 1.0))
        else:
            beta_q = (1.0 / (2.0 - u * alpha)) ** (1.0 / (eta + 1.0))
        child2 = 0.5 * (x1 + x2 + beta_q * (x2 - x1))

        if rng.random() < 0.5:
            child1, child2 = child2, child1
        c1[j] = min(max(child1, low), high)
        c2[j] = min(max(child2, low), high)
    return c1, c2


def polynomial_mutation(genome, eta, prob, rng, low=GENOME_LOW, high=GENOME_HIGH):
    """Bounded polynomial mutation, per-gene probability `prob`."""
    g = genome.copy()
    span = high - low
    for j in range(len(g)):
        if rng.random() > prob:
            continue
        u = rng.random()
        delta1 = (g[j] - low) / span
        delta2 = (high - g[j]) / span
        mut_pow = 1.0 / (eta + 1.0)
        if u < 0.5:
            xy = 1.0 - delta1
            val = 2.0 * u + (1.0 - 2.0 * u) * xy ** (eta + 1.0)
            delta_q = val**mut_pow - 1.0
        else:
            xy = 1.0 - delta2
            val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * xy ** (eta + 1.0)
            delta_q = 1.0 - val**mut_pow
        g[j] = min(max(g[j] + delta_q * span, low), high)
    return g


def vary(parents, config: SearchConfig, rng, n_genes=None, mutation_prob=None):
    """SBX then polynomial mutation over a list of parent genome pairs."""
    offspring = []
    for p1, p2 in parents:
        if n_genes is None:
            n_genes = len(p1)
        pm = mutation_prob
        if pm is None:
            pm = config.mutation_prob if config.mutation_prob is not None else 1.0 / n_genes
        c1, c2 = sbx_crossover(p1, p2, config.crossover_eta, config.crossover_prob, rng)
        offspring.append(polynomial_mutation(c1, config.mutation_eta, pm, rng))
        offspring.append(polynomial_mutation(c2, config.mutation_eta, pm, rng))
    return offspring


def hypervolume_2d(points, ref) -> float:
    """Exact dominated area of a 2-objective minimization front."""
    pts = [p for p in points if p[0] <= ref[0] and p[1] <= ref[1]]
    if not pts:
        return 0.0
    pts = sorted(pts)
    hv = 0.0
    prev_y = ref[1]
    for x, y in pts:
        if y < prev_y:
            hv += (ref[0] - x) * (prev_y - y)
            prev_y = y
    return hv


def _non_dominated_subset(individuals):
    """Mutually non-dominated members, deduplicated on objectives."""
    kept = []
    for ind in individuals:
        if any(dominates(other, ind) for other in individuals if other is not ind):
            continue
        if any(other.objectives == ind.objectives for other in kept):
            continue
        kept.append(ind)
    return kept


def nsga2(
    evaluate,
    n_genes: int,
    config: SearchConfig = SearchConfig(),
    initial_genomes=None,
    progress=None,
) -> ParetoFront:
    """Generational NSGA-II over genomes in [0, 100]^n_genes.

    `evaluate(genome) -> ((obj1, obj2), constraint_violation)`, both
    objectives minimized. The returned front is the archive of all
    non-dominated feasible solutions ever evaluated, so its hypervolume
    log is monotone by construction.
    """
    rng = np.random.default_rng(config.seed)
    pop_size = config.population_size

    genomes = [rng.uniform(GENOME_LOW, GENOME_HIGH, n_genes) for _ in range(pop_size)]
    if initial_genomes:
        for i, g in enumerate(initial_genomes[:pop_size]):
            genomes[i] = np.clip(np.asarray(g, dtype=float), GENOME_LOW, GENOME_HIGH)

    population = [_evaluated(evaluate, g) for g in genomes]
    archive = _non_dominated_subset([p for p in population if p.feasible])

    # Reference point fixed from the worst generation-0 objectives.
    worst = np.max([ind.objectives for ind in population], axis=0)
    ref = tuple(w + 0.1 * abs(w) + 1e-9 for w in worst)

    hv_log = [_archive_hypervolume(archive, ref)]
    _assign_rank_crowding(population)

    for gen in range(config.generations):
        parent_pairs = [
            (population[i].genome, population[j].genome)
            for i, j in tournament_select(population, rng, n_pairs=pop_size // 2)
        ]
        children = [
            _evaluated(evaluate, g) for g in vary(parent_pairs, config, rng, n_genes)
        ]
        combined = population + children
        fronts = non_dominated_sort(combined)
        survivors = []
        for front in fronts:
            members = [combined[i] for i in front]
            dist = crowding_distance([m.objectives for m in members])
            for m, d in zip(members, dist):
                m.crowding = float(d)
            if len(survivors) + len(members) <= pop_size:
                survivors.extend(members)
            else:
                order = np.argsort([-m.crowding for m in members], kind="stable")
                survivors.extend(members[i] for i in order[: pop_size - len(survivors)])
                break
        population = survivors
        _assign_rank_crowding(population)

        archive = _non_dominated_subset(archive + [c for c in children if c.feasible])
        hv_log.append(_archive_hypervolume(archive, ref))
        if progress is not None:
            progress(gen + 1, config.generations)

    if archive:
        return ParetoFront(solutions=archive, hypervolume_log=hv_log, feasible_found=True)
    # No feasible genome was ever seen: report the least-violating front.
    best = _non_dominated_subset(population)
    return ParetoFront(solutions=best, hypervolume_log=hv_log, feasible_found=False)


def _evaluated(evaluate, genome):
    objectives, violation = evaluate(genome)
    return Individual(
        genome=np.asarray(genome, dtype=float),
        objectives=tuple(float(v) for v in objectives),
        constraint_violation=float(max(violation, 0.0)),
    )


def _assign_rank_crowding(population):
    fronts = non_dominated_sort(population)
    for front in fronts:
        members = [population[i] for i in front]
        dist = crowding_distance([m.objectives for m in members])
        for m, d in zip(members, dist):
            m.crowding = float(d)


def _archive_hypervolume(archive, ref):
    feasible_points = [ind.objectives for ind in archive if ind.feasible]
    return hypervolume_2d(feasible_points, ref)


def schedule_evaluator(context, predictor, epi_params, template=None):
    """Genome -> ((deaths, -mobility AUC), ICU violation) via the simulator."""
    if template is None:
        template = strategy.canned_strategy("status_quo", context)

    def evaluate(genome):
        levels = np.asarray(genome, dtype=float).reshape(
            strategy.N_CATEGORIES, template.n_periods
        )
        schedule = strategy.PolicySchedule(
            country=template.country,
            levels=levels,
            start_date=template.start_date,
            end_date=template.end_date,
            period_days=template.period_days,
        )
        outcome = strategy.simulate_schedule(schedule, context, predictor, epi_params)
        violation = max(0.0, outcome.peak_critical - context.icu_capacity)
        return (outcome.total_deaths, -outcome.mobility_auc_mean), violation

    return evaluate


def optimize(
    context,
    predictor,
    epi_params,
    config: SearchConfig = SearchConfig(),
    progress=None,
) -> ParetoFront:
    """NSGA-II search for Pareto-optimal exit schedules for one country."""
    template = strategy.canned_strategy("status_quo", context)
    evaluate = schedule_evaluator(context, predictor, epi_params, template)
    initial = None
    if config.inject_canned:
        initial = [
            strategy.canned_strategy(kind, context).levels.reshape(-1)
            for kind in strategy.CANNED_KINDS
        ]
    n_genes = strategy.N_CATEGORIES * template.n_periods
    return nsga2(evaluate, n_genes, config, initial_genomes=initial, progress=progress)
