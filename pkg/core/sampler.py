"""
Heavy-tailed coefficient samplers.

Streams are numpy Generator(PCG64) instances seeded from a 64-bit master
seed; independent child streams come from SeedSequence.spawn, so instance
files are reproducible across platforms.
"""
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Literal, Optional

import numpy as np

SamplerKind = Literal["cauchy", "pareto", "constant"]

_CHUNK = 256


def make_rng(seed: Optional[int]) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def spawn_streams(master_seed: Optional[int], count: int) -> List[np.random.Generator]:
    """Independent generators for parallel consumers, one per child of the master seed."""
    children = np.random.SeedSequence(master_seed).spawn(count)
    return [np.random.Generator(np.random.PCG64(child)) for child in children]


def spawn_seeds(master_seed: Optional[int], count: int) -> List[int]:
    """32-bit integer seeds derived from the master seed by child index."""
    children = np.random.SeedSequence(master_seed).spawn(count)
    return [int(child.generate_state(1, dtype=np.uint32)[0]) for child in children]


def truncated_pareto_cdf(x: Any, alpha: float, bound: Optional[float]) -> np.ndarray:
    """CDF of |value| for the (optionally truncated) standard Pareto magnitude."""
    x = np.asarray(x, dtype=np.float64)
    raw = np.where(x < 1.0, 0.0, 1.0 - np.power(np.maximum(x, 1.0), -alpha))
    if bound is None:
        return raw
    norm = 1.0 - bound ** (-alpha)
    return np.clip(raw / norm, 0.0, 1.0)


@dataclass
class CoefficientSampler:
    """
    kind: "cauchy" (standard Cauchy), "pareto" (sign-symmetrized standard
    Pareto with shape alpha, |value| >= 1) or "constant" (always `value`).
    truncation: optional bound B; draws with |value| > B are redrawn.

    Single consumer: the RNG state advances with every draw. Raw values are
    drawn in fixed chunks and accepted values not yet handed out are kept, so
    k calls to sample() return the same values as one sample_many(k).
    """
    kind: SamplerKind = "cauchy"
    alpha: float = 2.0
    truncation: Optional[float] = None
    seed: Optional[int] = None
    value: float = 1.0
    _rng: Optional[np.random.Generator] = field(default=None, init=False, repr=False, compare=False)
    _pending: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.float64), init=False, repr=False,
                                 compare=False)

    def __post_init__(self):
        if self.kind not in ("cauchy", "pareto", "constant"):
            raise ValueError(f"Unknown sampler kind: {self.kind}")
        if self.kind == "pareto" and not self.alpha > 0:
            raise ValueError(f"Pareto shape alpha must be > 0, got {self.alpha}")
        if self.truncation is not None and not self.truncation > 0:
            raise ValueError(f"Truncation bound must be > 0, got {self.truncation}")
        if self.kind == "pareto" and self.truncation is not None and self.truncation < 1.0:
            raise ValueError("Pareto magnitudes are >= 1; truncation bound must be >= 1")
        if self.kind == "constant" and self.truncation is not None and abs(self.value) > self.truncation:
            raise ValueError("Constant value lies outside the truncation bound")

    @property
    def rng(self) -> np.random.Generator:
        if self._rng is None:
            self._rng = make_rng(self.seed)
        return self._rng

    def with_seed(self, seed: Optional[int]) -> "CoefficientSampler":
        """Fresh sampler with the same distribution and a new stream."""
        return replace(self, seed=seed)

    def config(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind, "alpha": self.alpha, "truncation": self.truncation, "seed": self.seed}
        if self.kind == "constant":
            data["value"] = self.value
        return data

    def _raw(self, count: int) -> np.ndarray:
        if self.kind == "cauchy":
            return self.rng.standard_cauchy(count)
        if self.kind == "pareto":
            # numpy's pareto() is the Lomax form; +1 gives scale-1 standard Pareto.
            magnitude = self.rng.pareto(self.alpha, count) + 1.0
            sign = np.where(self.rng.integers(0, 2, count) == 1, -1.0, 1.0)
            return sign * magnitude
        return np.full(count, float(self.value))

    def _accepted_chunk(self) -> np.ndarray:
        draw = self._raw(_CHUNK)
        if self.truncation is not None:
            draw = draw[np.abs(draw) <= float(self.truncation)]
        return draw

    def sample_many(self, count: int) -> np.ndarray:
        count = int(count)
        if count <= 0:
            return np.empty(0, dtype=np.float64)
        if self.kind == "constant":
            return self._raw(count)

        parts: List[np.ndarray] = [self._pending]
        have = self._pending.shape[0]
        while have < count:
            chunk = self._accepted_chunk()
            parts.append(chunk)
            have += chunk.shape[0]
        pool = np.concatenate(parts)
        self._pending = pool[count:].copy()
        return pool[:count]

    def sample(self) -> float:
        return float(self.sample_many(1)[0])


def sampler_from_config(data: Dict[str, Any]) -> CoefficientSampler:
    return CoefficientSampler(
        kind=data.get("kind", "cauchy"),
        alpha=float(data.get("alpha", 2.0)),
        truncation=data.get("truncation"),
        seed=data.get("seed"),
        value=float(data.get("value", 1.0)),
    )
