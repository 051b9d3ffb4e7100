"""Shared instance generators for the test suite.

Everything is seeded through numpy Generators so tests are reproducible;
helpers return plain package objects and never cache state between calls.
"""

import numpy as np

from fjattack import AttackConfig, FjParameters, InfluenceNetwork


def random_network(rng, n, density=0.4):
    """Random directed graph with every in-neighborhood nonempty."""
    edges = [
        (i, j)
        for i in range(n)
        for j in range(n)
        if i != j and rng.random() < density
    ]
    covered = {dst for _, dst in edges}
    for dst in range(n):
        if dst not in covered:
            edges.append(((dst + 1) % n, dst))
    return InfluenceNetwork(n, tuple(edges))


def complete_network(n):
    return InfluenceNetwork(
        n, tuple((i, j) for i in range(n) for j in range(n) if i != j)
    )


def random_params(rng, network, theta_range=(0.05, 0.95)):
    """Uniform opinions and stubbornness, Dirichlet rows on the support."""
    n = network.agent_count
    weights = np.zeros((n, n))
    for i in range(n):
        support = list(network.in_neighbors(i))
        weights[i, support] = rng.dirichlet(np.ones(len(support)))
    return FjParameters(
        network=network,
        intrinsic=rng.uniform(0.0, 1.0, n),
        stubbornness=rng.uniform(*theta_range, n),
        influence=weights,
    )


def random_instance(seed, n=None, density=0.4, theta_range=(0.05, 0.95)):
    rng = np.random.default_rng(seed)
    if n is None:
        n = int(rng.integers(4, 11))
    network = random_network(rng, n, density)
    return network, random_params(rng, network, theta_range)


def random_feasible_config(rng, network, p=1e-3, require_target=False):
    """Uniform attack configuration satisfying every budget constraint.

    Returns None when require_target is set and no sampled adversary has a
    positive target budget.
    """
    n = network.agent_count
    leader_budget = network.leader_budget()
    if leader_budget < 1:
        return None
    size = int(rng.integers(1, leader_budget + 1))
    adversaries = tuple(sorted(rng.choice(n, size=size, replace=False).tolist()))
    targets = {}
    any_target = False
    for j in adversaries:
        budget = network.target_budget(j)
        pool = [i for i in network.out_neighbors(j) if i not in adversaries]
        budget = min(budget, len(pool))
        if budget < 1:
            targets[j] = ()
            continue
        count = int(rng.integers(0, budget + 1))
        if count == 0:
            targets[j] = ()
            continue
        chosen = rng.choice(len(pool), size=count, replace=False)
        targets[j] = tuple(sorted(pool[k] for k in chosen))
        any_target = True
    if require_target and not any_target:
        return None
    return AttackConfig(adversaries=adversaries, targets=targets, influence_magnitude=p)
