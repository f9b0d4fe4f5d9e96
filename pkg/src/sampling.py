"""Seeded Monte Carlo estimation of membership fractions.

Each sample draws from its own stream ``numpy.random.default_rng([seed, index])``, so a sample
depends only on the seed and its index. Workers receive contiguous index chunks and results are
aggregated in index order, which keeps estimates identical for any worker count.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from .config import SamplingConfig
from .errors import PreconditionError, Undetermined
from .logger import LoggerMixin

# Two-sided 95% normal quantile
Z95 = 1.959963984540054

# A sample evaluates to True (member), False (non-member) or None (undetermined).
SampleFn = Callable[[np.random.Generator, int], Optional[bool]]


def sample_stream(seed: int, index: int) -> np.random.Generator:
    """Pseudorandom stream for one sample, keyed by (seed, index)."""
    return np.random.default_rng([seed, index])


def wilson_interval(hits: int, n: int, z: float = Z95) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        return (0.0, 1.0)
    p = hits / n
    denominator = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denominator
    half_width = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denominator
    return (max(0.0, centre - half_width), min(1.0, centre + half_width))


@dataclass
class DensityEstimate:
    """Sampled fraction of members, with undetermined samples counted apart."""

    fraction: float
    ci95: Tuple[float, float]
    n: int
    hits: int
    undetermined: int
    seed: int
    sampler: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "fraction": self.fraction,
            "ci95": list(self.ci95),
            "n": self.n,
            "hits": self.hits,
            "undetermined": self.undetermined,
            "seed": self.seed,
            "sampler": self.sampler,
        }


class DensitySampler(LoggerMixin):
    """Runs a per-sample predicate over N seeded samples, optionally across worker threads."""

    def __init__(self, config: Optional[SamplingConfig] = None):
        self.config = config or SamplingConfig()

    def check_sample_count(self, n: int) -> None:
        if n < self.config.min_samples:
            raise PreconditionError(
                f"sample count {n} is below the minimum of {self.config.min_samples}",
                {"samples": n, "min_samples": self.config.min_samples},
            )

    def evaluate(self, predicate: SampleFn, n: int, seed: int) -> List[Optional[bool]]:
        """Outcomes of ``predicate`` for sample indices 0..n-1, in index order."""
        workers = max(1, int(self.config.workers))
        if workers == 1 or n < 2 * workers:
            return [predicate(sample_stream(seed, index), index) for index in range(n)]

        bounds = np.linspace(0, n, workers + 1).astype(int)
        chunks = [range(int(bounds[w]), int(bounds[w + 1])) for w in range(workers)]

        def run_chunk(indices: range) -> List[Optional[bool]]:
            return [predicate(sample_stream(seed, index), index) for index in indices]

        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(run_chunk, chunks))
        return [outcome for chunk in results for outcome in chunk]

    def estimate(
        self,
        predicate: SampleFn,
        n: int,
        seed: int,
        sampler: Optional[Dict[str, Any]] = None,
    ) -> DensityEstimate:
        """Fraction of members among the determined samples, with a Wilson 95% interval."""
        self.check_sample_count(n)
        outcomes = self.evaluate(predicate, n, seed)
        hits = sum(1 for outcome in outcomes if outcome is True)
        undetermined = sum(1 for outcome in outcomes if outcome is None)
        determined = n - undetermined
        if determined == 0:
            raise Undetermined(f"all {n} samples were undetermined", {"samples": n})
        if undetermined:
            self.logger.warning(f"{undetermined} of {n} samples were undetermined")

        estimate = DensityEstimate(
            fraction=hits / determined,
            ci95=wilson_interval(hits, determined),
            n=n,
            hits=hits,
            undetermined=undetermined,
            seed=seed,
            sampler=dict(sampler or {}),
        )
        self.logger.debug(f"Density estimate {estimate.fraction:.6f} from {determined} samples (seed {seed})")
        return estimate
