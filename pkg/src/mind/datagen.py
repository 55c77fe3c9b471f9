"""Seeded generators for the artificial Concept, Distribution and Multi-concept problems.

Random numbers come from NumPy's ``Generator`` with the PCG64 bit generator
(``numpy.random.default_rng(seed)``), whose output is platform independent.
Positive bags are drawn first (ids ``p0, p1, ...``), then negative bags
(``n0, n1, ...``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Bag, Label, MILDataset

CONCEPT_BACKGROUND_STD = 2.0
CONCEPT_STD = 0.1
DISTRIBUTION_SHIFT = 0.5
DISTRIBUTION_STD = (1.0, 2.0)
MULTICONCEPT_RADIUS = (4.0, 6.0)


@dataclass(frozen=True)
class GenConfig:
    bags_per_class: int = 50
    instances_per_bag: int = 10
    dim: int = 2
    seed: int = 0

    def __post_init__(self):
        for name in ("bags_per_class", "instances_per_bag", "dim"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


def _assemble(pos, neg, dim):
    bags = [Bag(f"p{i}", x, Label.POSITIVE) for i, x in enumerate(pos)]
    bags += [Bag(f"n{i}", x, Label.NEGATIVE) for i, x in enumerate(neg)]
    return MILDataset(bags, dim)


def _replace_one(rng, bag, draw):
    bag[rng.integers(bag.shape[0])] = draw


def gen_concept(config: GenConfig) -> MILDataset:
    """Broad Gaussian background; each positive bag holds one draw from a tight central concept."""
    rng = np.random.default_rng(config.seed)
    n, S, d = config.bags_per_class, config.instances_per_bag, config.dim
    pos = []
    for _ in range(n):
        bag = rng.normal(0.0, CONCEPT_BACKGROUND_STD, size=(S, d))
        _replace_one(rng, bag, rng.normal(0.0, CONCEPT_STD, size=d))
        pos.append(bag)
    neg = [rng.normal(0.0, CONCEPT_BACKGROUND_STD, size=(S, d)) for _ in range(n)]
    return _assemble(pos, neg, d)


def gen_distribution(config: GenConfig) -> MILDataset:
    """Overlapping Gaussians: positives centred at +0.5, negatives at -0.5 on the first axis.

    Negative instances are twice as spread out (std 2 vs 1). A linear
    classifier on single instances stays weak, while whole bags differ
    clearly.
    """
    if config.instances_per_bag < 2:
        raise ValueError("Distribution bags need at least 2 instances")
    rng = np.random.default_rng(config.seed)
    n, S, d = config.bags_per_class, config.instances_per_bag, config.dim
    shift = np.zeros(d)
    shift[0] = DISTRIBUTION_SHIFT
    pos_std, neg_std = DISTRIBUTION_STD
    pos = [rng.normal(0.0, pos_std, size=(S, d)) + shift for _ in range(n)]
    neg = [rng.normal(0.0, neg_std, size=(S, d)) - shift for _ in range(n)]
    return _assemble(pos, neg, d)


def gen_multiconcept(config: GenConfig) -> MILDataset:
    """Unit Gaussian core; each positive bag holds one outlier at radius 4 to 6 in a random direction."""
    if config.instances_per_bag < 2:
        raise ValueError("Multi-concept bags need at least 2 instances")
    rng = np.random.default_rng(config.seed)
    n, S, d = config.bags_per_class, config.instances_per_bag, config.dim
    lo, hi = MULTICONCEPT_RADIUS
    pos = []
    for _ in range(n):
        bag = rng.normal(0.0, 1.0, size=(S, d))
        direction = rng.normal(size=d)
        direction /= np.linalg.norm(direction)
        _replace_one(rng, bag, rng.uniform(lo, hi) * direction)
        pos.append(bag)
    neg = [rng.normal(0.0, 1.0, size=(S, d)) for _ in range(n)]
    return _assemble(pos, neg, d)


GENERATORS = {
    "concept": gen_concept,
    "distribution": gen_distribution,
    "multiconcept": gen_multiconcept,
}


def generate(problem: str, config: GenConfig) -> MILDataset:
    try:
        return GENERATORS[problem](config)
    except KeyError:
        raise ValueError(f"unknown problem {problem!r}; choose from {', '.join(GENERATORS)}") from None
