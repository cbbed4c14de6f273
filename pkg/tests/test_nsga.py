import math

import numpy as np
import pytest

from exitsim import nsga, strategy, synth
from exitsim.errors import InvalidParameterError


def ind(objectives, violation=0.0):
    return nsga.Individual(
        genome=np.zeros(2), objectives=tuple(objectives), constraint_violation=violation
    )


def brute_force_fronts(population):
    """O(n^3) front assignment: peel non-dominated layers one at a time."""
    remaining = list(range(len(population)))
    fronts = []
    while remaining:
        layer = [
            p
            for p in remaining
            if not any(
                nsga.dominates(population[q], population[p]) for q in remaining if q != p
            )
        ]
        fronts.append(sorted(layer))
        remaining = [p for p in remaining if p not in layer]
    return fronts


def random_population(rng, n):
    pop = []
    for _ in range(n):
        violation = float(rng.choice([0.0, 0.0, rng.uniform(0, 5)]))
        pop.append(ind(rng.integers(0, 6, size=2).astype(float), violation))
    return pop


# ------------------------------------------------------------------- sorting

def test_single_individual_single_front():
    assert nsga.non_dominated_sort([ind((1.0, 2.0))]) == [[0]]


def test_strict_domination_two_fronts():
    pop = [ind((1.0, 1.0)), ind((2.0, 2.0))]
    assert nsga.non_dominated_sort(pop) == [[0], [1]]
    assert pop[0].rank == 0 and pop[1].rank == 1


def test_constrained_domination_rules():
    feasible = ind((5.0, 5.0))
    barely = ind((0.0, 0.0), violation=0.1)
    badly = ind((0.0, 0.0), violation=2.0)
    assert nsga.dominates(feasible, barely)
    assert nsga.dominates(barely, badly)
    assert not nsga.dominates(badly, barely)
    # equally infeasible: mutually non-dominated
    other = ind((9.0, 9.0), violation=2.0)
    assert not nsga.dominates(badly, other) and not nsga.dominates(other, badly)


def test_sort_matches_brute_force_oracle():
    for seed in range(100):
        rng = np.random.default_rng(seed)
        pop = random_population(rng, int(rng.integers(2, 51)))
        fast = [sorted(front) for front in nsga.non_dominated_sort(pop)]
        assert fast == brute_force_fronts(pop)


# ------------------------------------------------------------------ crowding

def test_crowding_small_fronts_infinite():
    assert np.all(np.isinf(nsga.crowding_distance([(1.0, 2.0)])))
    assert np.all(np.isinf(nsga.crowding_distance([(1.0, 2.0), (2.0, 1.0)])))


def test_crowding_collinear_midpoint():
    dist = nsga.crowding_distance([(0.0, 2.0), (1.0, 1.0), (2.0, 0.0)])
    assert math.isinf(dist[0]) and math.isinf(dist[2])
    assert dist[1] == pytest.approx(2.0)


def test_crowding_permutation_invariant():
    rng = np.random.default_rng(1)
    objs = [tuple(v) for v in rng.uniform(0, 1, (12, 2))]
    base = nsga.crowding_distance(objs)
    perm = rng.permutation(12)
    shuffled = nsga.crowding_distance([objs[i] for i in perm])
    assert np.allclose(shuffled, base[perm])


# ----------------------------------------------------------------- selection

def test_tournament_prefers_rank_then_crowding():
    # With 2 contestants, the worse one can only win a tournament when it
    # is drawn against itself (probability 1/4 per tournament).
    a, b = ind((0.0, 0.0)), ind((1.0, 1.0))
    a.rank, b.rank = 0, 1
    picks = nsga.tournament_select([a, b], np.random.default_rng(0), n_pairs=4000)
    share_b = sum(1 for pair in picks for i in pair if i == 1) / 8000
    assert 0.22 <= share_b <= 0.28
    # same drill with ranks tied and crowding deciding
    b.rank = 0
    a.crowding, b.crowding = math.inf, 1.0
    picks = nsga.tournament_select([a, b], np.random.default_rng(1), n_pairs=4000)
    share_b = sum(1 for pair in picks for i in pair if i == 1) / 8000
    assert 0.22 <= share_b <= 0.28


def test_fully_tied_tournament_is_fair():
    a, b = ind((1.0, 1.0)), ind((1.0, 1.0))
    a.rank = b.rank = 0
    a.crowding = b.crowding = 1.0
    rng = np.random.default_rng(3)
    picks = nsga.tournament_select([a, b], rng, n_pairs=5000)
    wins_a = sum(1 for pair in picks for i in pair if i == 0)
    share = wins_a / 10000
    assert 0.48 <= share <= 0.52


# ----------------------------------------------------------------- variation

def test_identity_variation_when_probabilities_zero():
    rng = np.random.default_rng(0)
    config = nsga.SearchConfig(crossover_prob=0.0, mutation_prob=0.0)
    p1, p2 = rng.uniform(0, 100, 10), rng.uniform(0, 100, 10)
    (c1, c2) = nsga.vary([(p1, p2)], config, rng)[0:2]
    assert np.array_equal(c1, p1) and np.array_equal(c2, p2)


def test_sbx_identical_parents_unchanged():
    rng = np.random.default_rng(1)
    p = rng.uniform(0, 100, 8)
    c1, c2 = nsga.sbx_crossover(p, p.copy(), eta=15.0, prob=1.0, rng=rng)
    assert np.array_equal(c1, p) and np.array_equal(c2, p)


def test_offspring_respect_bounds():
    rng = np.random.default_rng(2)
    config = nsga.SearchConfig()
    parents = [
        (rng.uniform(0, 100, 66), rng.uniform(0, 100, 66)) for _ in range(500)
    ]
    offspring = nsga.vary(parents, config, rng)
    assert len(offspring) == 1000
    kids = np.array(offspring)
    assert kids.min() >= 0.0 and kids.max() <= 100.0


def test_variation_deterministic_per_seed():
    config = nsga.SearchConfig()
    parents = [(np.full(6, 30.0), np.full(6, 70.0))]
    a = nsga.vary(parents, config, np.random.default_rng(7))
    b = nsga.vary(parents, config, np.random.default_rng(7))
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


def test_search_config_validation():
    with pytest.raises(InvalidParameterError):
        nsga.SearchConfig(population_size=7)
    with pytest.raises(InvalidParameterError):
        nsga.SearchConfig(crossover_prob=1.5)


# --------------------------------------------------------------- hypervolume

def test_hypervolume_rectangles():
    assert nsga.hypervolume_2d([(0.0, 0.0)], (1.0, 1.0)) == pytest.approx(1.0)
    assert nsga.hypervolume_2d([(0.5, 0.0), (0.0, 0.5)], (1.0, 1.0)) == pytest.approx(0.75)
    assert nsga.hypervolume_2d([(2.0, 2.0)], (1.0, 1.0)) == 0.0


def test_hypervolume_ignores_dominated_points():
    front = [(0.2, 0.8), (0.5, 0.5), (0.8, 0.2)]
    with_dup = front + [(0.6, 0.6), (0.9, 0.9)]
    ref = (1.0, 1.0)
    assert nsga.hypervolume_2d(with_dup, ref) == pytest.approx(
        nsga.hypervolume_2d(front, ref)
    )


# ------------------------------------------------------------------ nsga2

def toy_evaluate(genome):
    # classic convex front: minimize (g^2, (g-2)^2) on the first gene,
    # mapped from [0,100] to [0,2]
    g = genome[0] / 50.0
    return (g**2, (g - 2.0) ** 2), 0.0


def test_single_feasible_individual_front():
    front = nsga.nsga2(
        toy_evaluate, n_genes=1,
        config=nsga.SearchConfig(population_size=2, generations=1, inject_canned=False),
    )
    assert len(front.solutions) >= 1
    assert front.feasible_found


def test_toy_problem_converges_to_analytic_front():
    front = nsga.nsga2(
        toy_evaluate, n_genes=2,
        config=nsga.SearchConfig(population_size=40, generations=50, inject_canned=False),
    )
    # analytic front: f2 = (sqrt(f1) - 2)^2 for f1 in [0, 4]
    for sol in front.solutions:
        f1, f2 = sol.objectives
        assert 0.0 <= f1 <= 4.0 + 0.05
        assert abs(f2 - (math.sqrt(f1) - 2.0) ** 2) <= 0.05


def test_front_mutually_non_dominated_and_hv_monotone():
    front = nsga.nsga2(
        toy_evaluate, n_genes=2,
        config=nsga.SearchConfig(population_size=20, generations=25, inject_canned=False),
    )
    sols = front.solutions
    for a in sols:
        assert not any(nsga.dominates(b, a) for b in sols if b is not a)
    hv = front.hypervolume_log
    assert len(hv) == 26  # generation 0 plus one per generation
    assert all(h2 >= h1 - 1e-12 for h1, h2 in zip(hv, hv[1:]))


def test_nsga2_deterministic_per_seed():
    config = nsga.SearchConfig(population_size=12, generations=5, inject_canned=False, seed=4)
    a = nsga.nsga2(toy_evaluate, 2, config)
    b = nsga.nsga2(toy_evaluate, 2, config)
    assert [s.objectives for s in a.solutions] == [s.objectives for s in b.solutions]


def test_infeasible_problem_flagged():
    def impossible(genome):
        return (1.0, 1.0), 1.0 + genome[0]

    front = nsga.nsga2(
        impossible, 1, nsga.SearchConfig(population_size=8, generations=3, inject_canned=False)
    )
    assert not front.feasible_found
    assert front.solutions  # least-violating candidates still reported


# ------------------------------------------------------------- full pipeline

def test_optimize_luxembourg_stub(lux_context, stub_predictor, table_params):
    config = nsga.SearchConfig(population_size=20, generations=8)
    front = nsga.optimize(lux_context, stub_predictor, table_params, config)
    assert front.feasible_found
    assert all(s.feasible for s in front.solutions)
    assert all(s.genome.shape == (66,) for s in front.solutions)
    # every returned schedule respects the ICU cap when re-simulated
    evaluate = nsga.schedule_evaluator(lux_context, stub_predictor, table_params)
    for sol in front.solutions[:5]:
        objectives, violation = evaluate(sol.genome)
        assert violation == 0.0
        assert objectives == pytest.approx(sol.objectives)


def test_pareto_front_csv_and_json(lux_context, stub_predictor, table_params):
    import json

    front = nsga.optimize(
        lux_context, stub_predictor, table_params,
        nsga.SearchConfig(population_size=8, generations=2),
    )
    doc = json.loads(front.to_json())
    assert len(doc["solutions"]) == len(front.solutions)
    csv_lines = front.to_csv().strip().splitlines()
    assert csv_lines[0].startswith("deaths,neg_mobility_auc,feasible")
    assert len(csv_lines) == len(front.solutions) + 1
