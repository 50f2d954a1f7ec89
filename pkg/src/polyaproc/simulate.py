"""Seeded Monte Carlo for trajectories, moment estimates and limit variables.

Trial ``i`` draws its uniforms from a Philox stream keyed by
``SeedSequence(seed, spawn_key=(i,))``, so every trial is reproducible on its
own and results do not depend on how trials are grouped or threaded.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import NegativePropensity, ScaleOverflow, SmallProcess, SupportViolation
from .process import ProcessSpec
from .scalars import lcm_of_denominators
from .spectral import SpectralData, analyze, classify_process

MAX_BLOCK_UNIFORMS = 1 << 22
MAX_EXACT_SCALE = 1 << 52


def trial_generator(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(trial),))))


def trial_uniforms(seed: int, trial: int, steps: int) -> np.ndarray:
    return trial_generator(seed, trial).random(steps)


@dataclass(frozen=True)
class Scaled:
    """Integer (or float) encoding of the state and increments."""

    x0: np.ndarray
    increments: np.ndarray
    scale: int
    neg_tol: float


def scaled_system(spec: ProcessSpec, horizon: int) -> Scaled:
    if spec.exact:
        vals = [*spec.initial, *(x for r in spec.replacement for x in r)]
        D = lcm_of_denominators(vals)
        bound = D * (abs(spec.tau1) + horizon + 1) * max(1, max(abs(x) for x in vals))
        if bound >= MAX_EXACT_SCALE:
            raise ScaleOverflow(f"scaled integer state would exceed 2^52 (scale {D}, horizon {horizon})")
        x0 = np.array([int(x * D) for x in spec.initial], dtype=np.int64)
        inc = np.array([[int(x * D) for x in r] for r in spec.replacement], dtype=np.int64)
        return Scaled(x0, inc, D, 0.0)
    x0 = np.array([float(x) for x in spec.initial], dtype=np.float64)
    inc = np.array([[float(x) for x in r] for r in spec.replacement], dtype=np.float64)
    return Scaled(x0, inc, 1, 1e-9 * (float(spec.tau1) + horizon))


def simulate_path(spec: ProcessSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """All states X_1..X_n (rows), in canonical coordinates scaled by the common denominator.

    Uses the same selection rule as the block kernels, one step at a time.
    """
    sc = scaled_system(spec, n)
    u = rng.random(n - 1)
    path = np.empty((n, sc.x0.shape[0]), dtype=sc.x0.dtype)
    path[0] = sc.x0
    x = sc.x0.copy()
    for t in range(n - 1):
        if (x < -sc.neg_tol).any():
            raise NegativePropensity(f"negative propensity at step {t + 1}: {x / sc.scale}")
        props = np.where(x < 0, 0, x)
        cum = np.cumsum(props)
        hit = np.nonzero(cum > u[t] * cum[-1])[0]
        k = int(hit[0]) if hit.size else int(np.nonzero(props > 0)[0][-1])
        x = x + sc.increments[k]
        path[t + 1] = x
    return path


def simulate_trajectory(spec: ProcessSpec, n: int, rng: np.random.Generator):
    """Final state X_n; exact specs give Fractions, float specs give floats."""
    path = simulate_path(spec, n, rng)
    sc_scale = lcm_of_denominators([*spec.initial, *(x for r in spec.replacement for x in r)]) if spec.exact else 1
    last = path[-1]
    if spec.exact:
        return tuple(Fraction(int(v), sc_scale) for v in last)
    return tuple(float(v) for v in last)


def final_states(spec: ProcessSpec, horizon: int, trials: int, seed: int, workers: int = 1,
                 block: int | None = None, kernel=None) -> np.ndarray:
    """States X_horizon of ``trials`` independent trajectories, as float rows."""
    if horizon < 1 or trials < 1:
        raise ValueError("horizon and trials must be at least 1")
    sc = scaled_system(spec, horizon)
    steps = horizon - 1
    s = sc.x0.shape[0]
    if block is None:
        block = max(1, min(256, MAX_BLOCK_UNIFORMS // max(steps, 1)))
    kernel = kernel or _kernels.advance_block
    starts = list(range(0, trials, block))

    def run(start: int):
        stop = min(trials, start + block)
        uni = np.empty((stop - start, steps), dtype=np.float64)
        for i in range(start, stop):
            uni[i - start] = trial_uniforms(seed, i, steps)
        out = np.empty((stop - start, s), dtype=sc.x0.dtype)
        status = np.zeros(stop - start, dtype=np.int64)
        kernel(sc.x0, sc.increments, uni, out, status, sc.neg_tol)
        return out, status

    if workers <= 1:
        parts = [run(b) for b in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, starts))
    states = np.concatenate([p[0] for p in parts])
    status = np.concatenate([p[1] for p in parts])
    bad = np.nonzero(status)[0]
    if bad.size:
        raise NegativePropensity(f"trial {int(bad[0])} reached a negative propensity")
    return states.astype(np.float64) / sc.scale


@dataclass(frozen=True)
class Estimand:
    kind: str  # "u" or "w"
    alpha: tuple

    @property
    def label(self) -> str:
        return f"{self.kind}:{','.join(str(a) for a in self.alpha)}"

    @classmethod
    def parse(cls, text: str, s: int) -> "Estimand":
        kind, _, body = text.partition(":")
        kind = kind.strip().lower()
        if kind not in ("u", "w") or not body:
            raise ValueError(f"estimand must look like u:a1,...,as or w:k, got {text!r}")
        parts = [int(p) for p in body.split(",")]
        if kind == "w" and len(parts) == 1 and s != 1:
            k = parts[0]
            if not 1 <= k <= s:
                raise ValueError(f"W index {k} out of range")
            parts = [int(i == k - 1) for i in range(s)]
        if len(parts) != s or any(p < 0 for p in parts):
            raise ValueError(f"estimand {text!r} needs {s} nonnegative entries")
        return cls(kind, tuple(parts))


@dataclass(frozen=True)
class SimConfig:
    horizon: int
    trials: int
    seed: int
    estimands: tuple = ()
    workers: int = 1

    def __post_init__(self):
        if self.horizon < 1 or self.trials < 1:
            raise ValueError("horizon and trials must be at least 1")


@dataclass(frozen=True)
class EstimandStats:
    estimand: Estimand
    mean: complex
    se: float
    trials: int

    def row(self) -> dict:
        return {"estimand": self.estimand.label, "mean_re": repr(float(self.mean.real)),
                "mean_im": repr(float(self.mean.imag)), "se": repr(float(self.se)), "trials": self.trials}


@dataclass(frozen=True)
class SimStats:
    config: SimConfig
    stats: tuple = field(default_factory=tuple)
    samples: dict = field(default_factory=dict, compare=False, repr=False)

    def __getitem__(self, label: str) -> EstimandStats:
        for st in self.stats:
            if st.estimand.label == label:
                return st
        raise KeyError(label)

    def to_dict(self) -> dict:
        return {"horizon": self.config.horizon, "trials": self.config.trials, "seed": self.config.seed,
                "workers": self.config.workers, "estimates": [st.row() for st in self.stats]}


def _summaries(values: np.ndarray) -> tuple[complex, float]:
    T = values.shape[0]
    mean = complex(values.mean())
    if T < 2:
        return mean, math.nan
    var = float(np.sum(np.abs(values - mean) ** 2) / (T - 1))
    return mean, math.sqrt(var / T)


def _u_values(states: np.ndarray, spectral: SpectralData) -> np.ndarray:
    U = np.array([[complex(x) for x in row] for row in spectral.forms], dtype=np.complex128)
    return states.astype(np.complex128) @ U.T


def _monomials(uvals: np.ndarray, alpha: Sequence[int]) -> np.ndarray:
    out = np.ones(uvals.shape[0], dtype=np.complex128)
    for k, a in enumerate(alpha):
        if a:
            out = out * uvals[:, k] ** a
    return out


def estimate_moments(spec: ProcessSpec, config: SimConfig, spectral: SpectralData | None = None,
                     keep_samples: bool = False) -> SimStats:
    """Monte Carlo means of u^alpha(X_n) (and of W monomials for ``w`` estimands)."""
    spectral = spectral or analyze(spec)
    if any(est.kind == "w" for est in config.estimands) and classify_process(spectral).size_class != "Large":
        raise SmallProcess("limit variables W_k are only defined for large processes")
    states = final_states(spec, config.horizon, config.trials, config.seed, config.workers)
    uvals = _u_values(states, spectral)
    wvals = None
    stats = []
    samples = {}
    for est in config.estimands:
        if est.kind == "u":
            vals = _monomials(uvals, est.alpha)
        else:
            if wvals is None:
                wvals = _w_values(uvals, spectral, config.horizon)
            _check_w_support(est.alpha, spectral)
            vals = _monomials(wvals, est.alpha)
        mean, se = _summaries(vals)
        stats.append(EstimandStats(est, mean, se, config.trials))
        if keep_samples:
            samples[est.label] = vals
    return SimStats(config, tuple(stats), samples)


def _w_values(uvals: np.ndarray, spectral: SpectralData, horizon: int) -> np.ndarray:
    logn = math.log(horizon)
    scale = np.array([np.exp(-complex(lam) * logn) for lam in spectral.eigenvalues], dtype=np.complex128)
    return uvals * scale[None, :]


def _check_w_support(alpha, spectral: SpectralData) -> None:
    from .moments import designated_w_indices

    allowed = designated_w_indices(spectral)
    bad = [k + 1 for k, a in enumerate(alpha) if a and k + 1 not in allowed]
    if bad:
        raise SupportViolation(f"W indices {bad} are not among the designated indices {allowed}")


def estimate_w(spec: ProcessSpec, config: SimConfig, spectral: SpectralData,
               keep_samples: bool = False) -> SimStats:
    """Sample means of monomials in the estimates u_k(X_N)/N^lambda_k."""
    for est in config.estimands:
        if est.kind != "w":
            raise ValueError("estimate_w only takes w estimands")
    return estimate_moments(spec, config, spectral, keep_samples)


def stats_rows(stats: SimStats) -> list:
    return [st.row() for st in stats.stats]


__all__ = [
    "Estimand",
    "EstimandStats",
    "SimConfig",
    "SimStats",
    "estimate_moments",
    "estimate_w",
    "final_states",
    "simulate_path",
    "simulate_trajectory",
    "trial_generator",
    "trial_uniforms",
]
