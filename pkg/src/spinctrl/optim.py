"""Search engines: bound-constrained quasi-Newton ascent and a real-valued
genetic algorithm.

Both maximize.  The quasi-Newton routine is a limited-memory BFGS with
gradient projection onto the box and an Armijo backtracking line search
clipped to the bounds.  The GA follows the classic generational loop:
select two parents, two-point crossover, per-gene reset mutation, repeat
until the next population is full, with optional elitism.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "Objective",
    "Bounds",
    "GaConfig",
    "lbfgs_b_maximize",
    "mutate",
    "crossover_two_point",
    "select",
    "ga_maximize",
]


@dataclass(frozen=True)
class Objective:
    """A score to maximize, optionally with an analytic gradient."""

    evaluate: Callable[[np.ndarray], float]
    evaluate_with_gradient: Optional[Callable] = None
    direction: str = "maximize"

    def __post_init__(self):
        if self.direction != "maximize":
            raise ValueError("only maximization objectives are supported")


@dataclass(frozen=True)
class Bounds:
    """Symmetric box applied elementwise to every parameter."""

    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError("lower bound must be strictly below upper bound")

    def clip(self, x):
        return np.clip(x, self.lower, self.upper)

    def uniform(self, rng, size):
        return rng.uniform(self.lower, self.upper, size)


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 64
    generations: int = 300
    keep_probability: float = 0.95
    selection: str = "tournament"
    tournament_k: int = 3
    truncation_fraction: float = 0.25
    elitism: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 4 or self.population_size % 2:
            raise ValueError("population_size must be even and >= 4")
        if not 0.0 <= self.keep_probability <= 1.0:
            raise ValueError("keep_probability must be in [0, 1]")
        if self.selection not in ("tournament", "truncation"):
            raise ValueError("selection must be 'tournament' or 'truncation'")
        if self.tournament_k < 1:
            raise ValueError("tournament_k must be >= 1")
        if not 0.0 < self.truncation_fraction <= 1.0:
            raise ValueError("truncation_fraction must be in (0, 1]")
        if not 0 <= self.elitism < self.population_size:
            raise ValueError("elitism must be < population_size")
        if self.generations < 1:
            raise ValueError("generations must be >= 1")


def _two_loop_direction(grad, s_hist, y_hist):
    """Inverse-Hessian product of standard two-loop recursion (history 10)."""
    q = grad.copy()
    alphas = []
    rhos = [1.0 / float(np.dot(y, s)) for s, y in zip(s_hist, y_hist)]
    for (s, y), rho in zip(reversed(list(zip(s_hist, y_hist))), reversed(rhos)):
        a = rho * float(np.dot(s, q))
        alphas.append(a)
        q -= a * y
    if s_hist:
        s, y = s_hist[-1], y_hist[-1]
        q *= float(np.dot(s, y)) / float(np.dot(y, y))
    for (s, y), rho, a in zip(zip(s_hist, y_hist), rhos, reversed(alphas)):
        b = rho * float(np.dot(y, q))
        q += (a - b) * s
    return q


def lbfgs_b_maximize(obj, bounds, start, max_iters=500, tol=1e-8, history=10):
    """Maximize within a box using projected limited-memory BFGS.

    Terminates when the projected-gradient infinity norm drops to ``tol``,
    on a relative score change below 1e-12, or after ``max_iters``
    iterations.  Returns ``(point, score, iterations)``.
    """
    if obj.evaluate_with_gradient is None:
        raise ValueError("lbfgs_b_maximize requires an objective with gradients")

    def eval_neg(x):
        score, grad = obj.evaluate_with_gradient(x)
        if not np.isfinite(score) or not np.all(np.isfinite(grad)):
            raise RuntimeError(
                f"objective returned non-finite value at x = {np.asarray(x)!r}"
            )
        return -float(score), -np.asarray(grad, dtype=np.float64)

    x = bounds.clip(np.asarray(start, dtype=np.float64).copy())
    phi, gphi = eval_neg(x)
    s_hist, y_hist = [], []
    iters = 0

    for _ in range(max_iters):
        iters += 1
        d = -_two_loop_direction(gphi, s_hist, y_hist)
        if float(np.dot(d, gphi)) >= 0.0:
            d = -gphi  # recovered steepest ascent when curvature is unusable

        # Armijo backtracking along the projected path
        alpha, accepted = 1.0, False
        xn, phin, gn = x, phi, gphi
        for _ in range(50):
            xn = bounds.clip(x + alpha * d)
            step = xn - x
            if not np.any(step):
                break
            phin, gn = eval_neg(xn)
            if phin <= phi + 1e-4 * float(np.dot(gphi, step)):
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            break

        s = xn - x
        y = gn - gphi
        sy = float(np.dot(s, y))
        if sy > 1e-10 * float(np.linalg.norm(s) * np.linalg.norm(y)):
            s_hist.append(s)
            y_hist.append(y)
            if len(s_hist) > history:
                s_hist.pop(0)
                y_hist.pop(0)

        prev_phi = phi
        x, phi, gphi = xn, phin, gn

        projected = x - bounds.clip(x - gphi)
        if float(np.max(np.abs(projected))) <= tol:
            break
        if abs(prev_phi - phi) <= 1e-12 * max(1.0, abs(phi)):
            break

    return x, -phi, iters


def mutate(genome, p, rng, bounds):
    """Keep each gene with probability ``p``, else redraw uniformly in the
    bounds.  Consumes exactly two rng draws per gene (one keep decision,
    one replacement value), so the stream advance is input-independent.
    """
    genome = np.asarray(genome, dtype=np.float64)
    keep = rng.random(genome.size) < p
    replacement = bounds.uniform(rng, genome.size)
    return np.where(keep, genome, replacement)


def crossover_two_point(x, y, rng):
    """Two-point crossover: the strict interior ``c1 < i < c2`` is swapped.

    ``c1 < c2`` are drawn uniformly over distinct positions; an adjacent
    pair leaves both children equal to their parents.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError("parents must have equal length")
    n = x.size
    if n < 2:
        return x.copy(), y.copy()
    c1, c2 = np.sort(rng.choice(n, size=2, replace=False))
    idx = np.arange(n)
    outer = (idx <= c1) | (idx >= c2)
    return np.where(outer, x, y), np.where(outer, y, x)


def select(population, cfg, rng):
    """Pick one parent genome from ``(genome, fitness)`` pairs.

    Tournament: best of ``tournament_k`` uniform draws.  Truncation:
    uniform draw from the top fraction.  Fitness ties break toward the
    lower population index.
    """
    size = len(population)
    if size == 0:
        raise ValueError("cannot select from an empty population")
    if cfg.selection == "tournament":
        draws = rng.integers(0, size, size=cfg.tournament_k)
        best = min(draws, key=lambda i: (-population[i][1], i))
        return population[best][0]
    order = sorted(range(size), key=lambda i: (-population[i][1], i))
    top = max(1, int(np.ceil(cfg.truncation_fraction * size)))
    return population[order[int(rng.integers(0, top))]][0]


def ga_maximize(obj, bounds, num_pulses, cfg):
    """Generational GA over genomes of ``2 * num_pulses`` reals.

    Every generation is evaluated in full; elites survive unchanged and the
    rest of the next population comes from select / crossover / mutate
    pairs.  With a deterministic objective the run is a pure function of
    ``cfg.seed``.  Returns ``(best genome, best score, per-generation best
    scores)``.
    """
    n_genes = 2 * num_pulses
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    population = bounds.uniform(rng, (cfg.population_size, n_genes))

    best_genome = None
    best_score = -np.inf
    history = []

    for generation in range(cfg.generations):
        fits = np.empty(cfg.population_size)
        for i, genome in enumerate(population):
            value = float(obj.evaluate(genome))
            if not np.isfinite(value):
                warnings.warn(
                    f"discarding genome {i} with non-finite fitness {value}",
                    stacklevel=2,
                )
                value = -np.inf
            fits[i] = value

        gen_best = int(min(range(cfg.population_size), key=lambda i: (-fits[i], i)))
        history.append(float(fits[gen_best]))
        if fits[gen_best] > best_score:
            best_score = float(fits[gen_best])
            best_genome = population[gen_best].copy()

        if generation == cfg.generations - 1:
            break

        order = sorted(range(cfg.population_size), key=lambda i: (-fits[i], i))
        scored = list(zip(population, fits))
        offspring = [population[i].copy() for i in order[: cfg.elitism]]
        while len(offspring) < cfg.population_size:
            mom = select(scored, cfg, rng)
            dad = select(scored, cfg, rng)
            sister, brother = crossover_two_point(mom, dad, rng)
            offspring.append(mutate(sister, cfg.keep_probability, rng, bounds))
            if len(offspring) < cfg.population_size:
                offspring.append(mutate(brother, cfg.keep_probability, rng, bounds))
        population = np.array(offspring)

    return best_genome, best_score, history
