"""Seeded Monte Carlo sampling of detector patterns and ion measurement results.

Each trial draws from the exact outcome distributions computed by the
protocol module, so the empirical frequencies are a statistical check of
those probabilities. Trial ``k`` uses a generator derived from ``(seed, k)``
and is independent of every other trial.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .core import MixedState, tensor
from .protocol import (
    ALL_PATTERNS,
    OUTCOMES,
    SUCCESS,
    Mode,
    PureInput,
    Variant,
    WernerInput,
    detector_outcomes,
    ghz_reduce,
    ghz_state,
    pattern_name,
)


@dataclass(frozen=True)
class TrajectoryConfig:
    """Either a Werner input (``fidelity``) or a pure input (``a_squared``)."""

    fidelity: Optional[float] = None
    a_squared: Optional[float] = None
    variant: Variant = Variant.PSI_LIKE
    reduce: bool = True

    def __post_init__(self):
        if (self.fidelity is None) == (self.a_squared is None):
            raise ValueError("set exactly one of fidelity or a_squared")
        value = self.fidelity if self.fidelity is not None else self.a_squared
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"input parameter must lie in [0, 1], got {value}")
        object.__setattr__(self, "variant", Variant(self.variant))

    @property
    def mode(self) -> Mode:
        return Mode.MIXED if self.fidelity is not None else Mode.PURE

    def mixture(self) -> MixedState:
        if self.fidelity is not None:
            return WernerInput(self.fidelity).two_pair_mixture()
        inp = PureInput.from_a_squared(self.a_squared)
        return MixedState.pure(tensor(inp.pair_state((1, 2), self.variant), inp.pair_state((3, 4), self.variant)))


@dataclass(frozen=True)
class TrajectoryStats:
    trials: int
    seed: int
    exact_success: float
    successes: int
    exact_phi_fraction: Optional[float]
    phi_successes: int
    pattern_counts: dict
    outcome_counts: dict

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials

    @property
    def success_stderr(self) -> float:
        """Binomial standard error from the exact success probability."""
        p = self.exact_success
        return math.sqrt(p * (1 - p) / self.trials)

    @property
    def phi_fraction(self) -> float:
        return self.phi_successes / self.successes if self.successes else math.nan

    @property
    def phi_stderr(self) -> float:
        q = self.exact_phi_fraction
        if q is None or not self.successes:
            return math.nan
        return math.sqrt(q * (1 - q) / self.successes)

    def rows(self):
        """(quantity, exact, empirical, standard_error) rows for CSV output."""
        yield ("success_probability", self.exact_success, self.success_rate, self.success_stderr)
        if self.exact_phi_fraction is not None:
            yield ("posterior_phi_fraction", self.exact_phi_fraction, self.phi_fraction, self.phi_stderr)
        for pattern in ALL_PATTERNS:
            yield (f"pattern:{pattern_name(pattern)}", math.nan, self.pattern_counts[pattern] / self.trials, math.nan)
        if self.successes:
            for o in OUTCOMES:
                yield (f"ions34:{''.join(o)}", 0.25, self.outcome_counts[o] / self.successes, math.nan)


def trial_generator(seed: int, k: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(k,)))


class _Sampler:
    def __init__(self, config: TrajectoryConfig):
        self.config = config
        outcomes = detector_outcomes(config.mixture(), config.mode)
        self.pattern_probs = np.array([outcomes[p].probability for p in ALL_PATTERNS])
        self.success = outcomes[SUCCESS]
        self.posterior = self.success.four_ion_state
        # Phi+-type heralded branch; only meaningful for Werner inputs
        self.phi_state = ghz_state(1)

    def _pick(self, u: float, probs) -> int:
        acc = 0.0
        total = math.fsum(probs)
        for i, p in enumerate(probs):
            acc += p / total
            if u < acc:
                return i
        return len(probs) - 1

    def trial(self, seed: int, k: int):
        """Returns (pattern index, is_phi_branch or None, reduction outcome or None)."""
        rng = trial_generator(seed, k)
        idx = self._pick(rng.random(), self.pattern_probs)
        if ALL_PATTERNS[idx] != SUCCESS:
            return idx, None, None
        b = self._pick(rng.random(), self.posterior.weights)
        branch = self.posterior.states[b]
        is_phi = abs(abs(self.phi_state.inner(branch)) - 1.0) < 1e-9
        outcome = None
        if self.config.reduce:
            outcome = ghz_reduce(MixedState.pure(branch), rng=rng).ion34_results
        return idx, is_phi, outcome


def _run_chunk(config: TrajectoryConfig, seed: int, ks: range) -> List[tuple]:
    sampler = _Sampler(config)
    return [sampler.trial(seed, k) for k in ks]


def run_trajectories(config: TrajectoryConfig, trials: int, seed: int = 0, workers: int = 1) -> TrajectoryStats:
    """Sample ``trials`` independent runs; results do not depend on ``workers``."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    if workers <= 1:
        results = _run_chunk(config, seed, range(trials))
    else:
        bounds = np.linspace(0, trials, workers + 1).astype(int)
        chunks = [range(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:])]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_run_chunk, [config] * len(chunks), [seed] * len(chunks), chunks)
            results = [r for part in parts for r in part]

    sampler_probs = _Sampler(config)
    pattern_counts = {p: 0 for p in ALL_PATTERNS}
    outcome_counts = {o: 0 for o in OUTCOMES}
    successes = phi = 0
    for idx, is_phi, outcome in results:
        pattern_counts[ALL_PATTERNS[idx]] += 1
        if is_phi is None:
            continue
        successes += 1
        phi += bool(is_phi)
        if outcome is not None:
            outcome_counts[outcome] += 1

    exact_phi = None
    if config.mode is Mode.MIXED and sampler_probs.posterior is not None:
        exact_phi = sampler_probs.posterior.weight_of(sampler_probs.phi_state)
    return TrajectoryStats(
        trials=trials,
        seed=seed,
        exact_success=sampler_probs.success.probability,
        successes=successes,
        exact_phi_fraction=exact_phi,
        phi_successes=phi,
        pattern_counts=pattern_counts,
        outcome_counts=outcome_counts,
    )
