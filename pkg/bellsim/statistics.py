"""Mergeable correlation estimates and deterministic block partitioning.

An estimate keeps the count, the mean and the sum of squared deviations of
the per-trial values (and of their imaginary parts for complex-valued
models), so partial estimates merge exactly with Chan's pairwise update.
Trials are cut into fixed-size blocks that each own a random sub-stream;
blocks may run on any number of threads and are always merged in block
order, so the result never depends on the thread count.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from bellsim.exceptions import EstimationError, MergeError
from bellsim.geometry import UnitVector3

logger = logging.getLogger(__name__)

DEFAULT_BLOCK_SIZE: int = 65536

T = TypeVar("T")


@dataclass(frozen=True)
class CorrelationEstimate:
    """Monte Carlo estimate of a correlation ``P(a, b)``.

    Attributes:
        model: Name of the model that produced the trials.
        a: Setting at station A.
        b: Setting at station B.
        n: Number of trials (0 for a closed-form value).
        mean: Mean of the real per-trial values.
        m2: Sum of squared deviations of the real per-trial values.
        im_mean: Mean of the imaginary parts, None for real-valued models.
        im_m2: Sum of squared deviations of the imaginary parts.
    """

    model: str
    a: UnitVector3
    b: UnitVector3
    n: int
    mean: float
    m2: float = 0.0
    im_mean: Optional[float] = None
    im_m2: Optional[float] = None

    @classmethod
    def from_values(
        cls,
        model: str,
        a: UnitVector3,
        b: UnitVector3,
        values: np.ndarray,
        imaginary: Optional[np.ndarray] = None,
    ) -> "CorrelationEstimate":
        """Single-pass estimate over an array of per-trial values.

        Raises:
            EstimationError: If ``values`` is empty.
        """
        values = np.asarray(values, dtype=float)
        if values.size == 0:
            raise EstimationError("Cannot estimate a correlation from zero trials")
        mean = float(np.mean(values))
        m2 = float(np.sum((values - mean) ** 2))
        im_mean: Optional[float] = None
        im_m2: Optional[float] = None
        if imaginary is not None:
            imaginary = np.asarray(imaginary, dtype=float)
            im_mean = float(np.mean(imaginary))
            im_m2 = float(np.sum((imaginary - im_mean) ** 2))
        return cls(model, a, b, int(values.size), mean, m2, im_mean, im_m2)

    @classmethod
    def exact(cls, model: str, a: UnitVector3, b: UnitVector3, value: float) -> "CorrelationEstimate":
        """A closed-form correlation, carried as an estimate with ``n = 0``."""
        return cls(model, a, b, 0, float(value))

    @property
    def is_analytic(self) -> bool:
        return self.n == 0

    @property
    def settings(self) -> Tuple[UnitVector3, UnitVector3]:
        return (self.a, self.b)

    @property
    def stderr(self) -> float:
        """Sample standard deviation over ``sqrt(n)``; 0 for fewer than two trials."""
        return _stderr(self.n, self.m2)

    @property
    def im_stderr(self) -> Optional[float]:
        if self.im_m2 is None:
            return None
        return _stderr(self.n, self.im_m2)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "model": self.model,
            "a": list(self.a.as_tuple()),
            "b": list(self.b.as_tuple()),
            "n": self.n,
            "mean": self.mean,
            "stderr": self.stderr,
            "im_mean": self.im_mean,
            "im_stderr": self.im_stderr,
        }


def _stderr(n: int, m2: float) -> float:
    if n < 2:
        return 0.0
    return math.sqrt(max(m2, 0.0) / (n - 1)) / math.sqrt(n)


def _merge_moments(n1: int, mean1: float, m2_1: float, n2: int, mean2: float, m2_2: float) -> Tuple[float, float]:
    n = n1 + n2
    delta = mean2 - mean1
    mean = mean1 + delta * n2 / n
    m2 = m2_1 + m2_2 + delta * delta * n1 * n2 / n
    return mean, m2


def merge_estimates(parts: Sequence[CorrelationEstimate]) -> CorrelationEstimate:
    """Pool partial estimates of the same model and settings, in order.

    Raises:
        EstimationError: If ``parts`` is empty or contains closed-form values.
        MergeError: If the parts disagree on model or settings.
    """
    if not parts:
        raise EstimationError("Nothing to merge")
    first = parts[0]
    for part in parts:
        if (part.model, part.a, part.b) != (first.model, first.a, first.b):
            raise MergeError(
                f"Cannot merge estimates of {part.model} at {part.settings} "
                f"with {first.model} at {first.settings}"
            )
        if part.is_analytic:
            raise EstimationError("Closed-form values carry no trials to merge")
        if (part.im_mean is None) != (first.im_mean is None):
            raise MergeError("Cannot merge real-valued and complex-valued estimates")

    pooled = first
    for part in parts[1:]:
        mean, m2 = _merge_moments(pooled.n, pooled.mean, pooled.m2, part.n, part.mean, part.m2)
        im_mean, im_m2 = pooled.im_mean, pooled.im_m2
        if pooled.im_mean is not None:
            im_mean, im_m2 = _merge_moments(
                pooled.n, pooled.im_mean, pooled.im_m2, part.n, part.im_mean, part.im_m2
            )
        pooled = replace(pooled, n=pooled.n + part.n, mean=mean, m2=m2, im_mean=im_mean, im_m2=im_m2)
    return pooled


def block_sizes(n: int, block_size: int = DEFAULT_BLOCK_SIZE) -> List[int]:
    """Sizes of the consecutive blocks ``n`` trials are cut into.

    Raises:
        EstimationError: If ``n`` or ``block_size`` is below 1.
    """
    if n < 1:
        raise EstimationError(f"Number of trials must be at least 1, got {n}")
    if block_size < 1:
        raise EstimationError(f"Block size must be at least 1, got {block_size}")
    full, rest = divmod(n, block_size)
    return [block_size] * full + ([rest] if rest else [])


def map_blocks(func: Callable[[int, int], T], sizes: Sequence[int], threads: int = 1) -> List[T]:
    """Apply ``func(block_index, block_size)`` to every block, results in block order."""
    indices = range(len(sizes))
    if threads <= 1 or len(sizes) <= 1:
        return [func(k, sizes[k]) for k in indices]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, indices, sizes))
