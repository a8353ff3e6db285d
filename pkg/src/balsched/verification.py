"""Monte Carlo checks of the allocation guarantees.

Each check simulates with the same destination sampler the engine uses
(``rng.destinations``) or with the engine itself, compares the estimate to
its closed form and returns a ``LemmaReport``. Two-sided checks pass within
``sigmas`` standard errors of the prediction; the tail check is one-sided
because the prediction is only an upper bound.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.stats import binom

from balsched import rng
from balsched.engine import RraConfig, row_variances, rra
from balsched.model import ConfigurationError, JobPool

LEMMA_IDS = ("L1", "L2", "L3", "L4", "C1")
SIGMAS = 4.0
_CHUNK_CELLS = 1 << 20


@dataclass
class LemmaReport:
    lemma_id: str
    predicted: float
    observed: float
    trials: int
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def _trial_seeds(seed: int, label: str, trials: int) -> np.ndarray:
    return rng.sub_seeds(rng.derive_seed(seed, label), 0, trials)


def _chunks(trials: int, width: int):
    step = max(1, _CHUNK_CELLS // max(width, 1))
    for lo in range(0, trials, step):
        yield lo, min(lo + step, trials)


def _check_trials(trials: int) -> None:
    if trials < 1:
        raise ConfigurationError(f"trials must be >= 1, got {trials}")


def check_concentration(l: int, J: int, trials: int = 200_000, seed: int = 0, sigmas: float = SIGMAS) -> LemmaReport:
    """Frequency that all ``J`` marked jobs land in schedule 1; predicted ``l**-J``."""
    if l < 2 or J < 1:
        raise ConfigurationError("need l >= 2 and J >= 1")
    _check_trials(trials)
    seeds = _trial_seeds(seed, "L1", trials)
    hits = 0
    for lo, hi in _chunks(trials, J):
        dest = rng.destinations(seeds[lo:hi], J, l)
        hits += int(np.count_nonzero((dest == 0).all(axis=1)))
    p = float(Fraction(1, l**J))
    observed = hits / trials
    tol = sigmas * math.sqrt(p * (1 - p) / trials)
    return LemmaReport(
        "L1", p, observed, trials, tol, abs(observed - p) <= tol,
        {"l": l, "J": J, "hits": hits, "expected_hits": p * trials, "seed": seed},
    )


def _loads(seeds: np.ndarray, n: int, l: int) -> np.ndarray:
    """Jobs landing in schedule 1 per trial."""
    out = np.empty(len(seeds), dtype=np.int64)
    for lo, hi in _chunks(len(seeds), n):
        out[lo:hi] = (rng.destinations(seeds[lo:hi], n, l) == 0).sum(axis=1)
    return out


def check_expected_load(n: int, l: int, trials: int = 20_000, seed: int = 0, sigmas: float = SIGMAS) -> LemmaReport:
    """Mean number of jobs in a fixed schedule; predicted ``n / l``."""
    if n < 1 or l < 1:
        raise ConfigurationError("need n >= 1 and l >= 1")
    _check_trials(trials)
    loads = _loads(_trial_seeds(seed, "L2", trials), n, l)
    p = 1.0 / l
    predicted = n / l
    observed = float(loads.mean())
    tol = sigmas * math.sqrt(n * p * (1 - p) / trials)
    return LemmaReport(
        "L2", predicted, observed, trials, tol, abs(observed - predicted) <= tol,
        {"n": n, "l": l, "min_load": int(loads.min()), "max_load": int(loads.max()), "seed": seed},
    )


def harmonic(l: int) -> Fraction:
    return sum((Fraction(1, i) for i in range(1, l + 1)), Fraction(0))


def coupon_collector_mean(l: int) -> Fraction:
    """Exact expected placements until all ``l`` schedules are nonempty: ``l * H_l``."""
    return l * harmonic(l)


def coupon_collector_variance(l: int) -> Fraction:
    return l * l * sum((Fraction(1, i * i) for i in range(1, l + 1)), Fraction(0)) - l * harmonic(l)


def _cover_times(seeds: np.ndarray, l: int) -> np.ndarray:
    """Placements needed per trial until every schedule holds a job."""
    width = max(8, int(math.ceil(2 * float(coupon_collector_mean(l)))))
    result = np.zeros(len(seeds), dtype=np.int64)
    pending = np.arange(len(seeds))
    seen = np.zeros((len(seeds), l), dtype=bool)
    offset = 0
    while pending.size:
        dest = rng.destinations(seeds[pending], width, l, offset=offset)
        # first position of every schedule inside this window, width if absent
        first = np.full((pending.size, l), width, dtype=np.int64)
        for s in range(l):
            hit = dest == s
            first[:, s] = np.where(hit.any(axis=1), hit.argmax(axis=1), width)
        first[seen[pending]] = -1
        done = (first < width).all(axis=1)
        result[pending[done]] = offset + first[done].max(axis=1) + 1
        seen[pending] |= first < width
        pending = pending[~done]
        offset += width
    return result


def check_coupon_collector(l: int, trials: int = 20_000, seed: int = 0, sigmas: float = SIGMAS) -> LemmaReport:
    """Mean placements until no schedule is empty, against the exact ``l * H_l``."""
    if l < 1:
        raise ConfigurationError("need l >= 1")
    _check_trials(trials)
    seeds = _trial_seeds(seed, "L3", trials)
    times = np.concatenate([_cover_times(seeds[lo:hi], l) for lo, hi in _chunks(trials, 4 * l)])
    predicted = float(coupon_collector_mean(l))
    observed = float(times.mean())
    tol = sigmas * math.sqrt(float(coupon_collector_variance(l)) / trials)
    return LemmaReport(
        "L3", predicted, observed, trials, tol, abs(observed - predicted) <= tol,
        {"l": l, "l_ln_l": l * math.log(l), "exact": str(coupon_collector_mean(l)), "seed": seed},
    )


def chernoff_bound(n: int, l: int) -> float:
    return math.exp(-n / (12 * l))


def check_chernoff_tail(n: int, l: int, trials: int = 100_000, seed: int = 0) -> LemmaReport:
    """Frequency of a fixed schedule receiving >= 1.5 n/l jobs; must not exceed the bound."""
    if n < 1 or l < 2:
        raise ConfigurationError("need n >= 1 and l >= 2")
    _check_trials(trials)
    loads = _loads(_trial_seeds(seed, "L4", trials), n, l)
    cutoff = 1.5 * n / l
    observed = float(np.count_nonzero(loads >= cutoff)) / trials
    bound = chernoff_bound(n, l)
    k = math.ceil(cutoff)
    exact_tail = float(binom.sf(k - 1, n, 1.0 / l))
    return LemmaReport(
        "L4", bound, observed, trials, 0.0, observed <= bound,
        {"n": n, "l": l, "cutoff": cutoff, "exact_tail": exact_tail, "one_sided": True, "seed": seed},
    )


def secretary_pool(n: int, seed: int) -> JobPool:
    """Pool with continuous costs, so equal variances across iterations have probability 0."""
    u = rng.uniforms(np.array([rng.derive_seed(seed, "C1-pool")], dtype=np.uint64), n)[0]
    return JobPool.from_costs(1.0 + 99.0 * u)


def secretary_prefix(K: int) -> int:
    """Number of leading iterations, ``K/e`` rounded to nearest (4000 -> 1472, 8000 -> 2943)."""
    return max(1, round(K / math.e))


def check_secretary(
    K: int, trials: int = 2000, seed: int = 0, n: int = 24, l: int = 3, sigmas: float = SIGMAS
) -> LemmaReport:
    """How often the best of ``K`` allocations is among the first ``round(K/e)``.

    Iterations are i.i.d., so the position of the (almost surely unique)
    minimum is uniform and the frequency tends to ``round(K/e)/K``, close to
    ``1/e`` for large ``K``. Judged against ``1/e``; ``details`` carries the
    exact prefix fraction, which matters for tiny ``K``.
    """
    if K < 3:
        raise ConfigurationError("need K >= 3")
    _check_trials(trials)
    pool = secretary_pool(n, seed)
    prefix = secretary_prefix(K)
    trial_seeds = [rng.derive_seed(seed, "C1", t) for t in range(trials)]
    hits = 0
    ties = 0
    for ts in trial_seeds:
        v = row_variances(rra(pool, RraConfig(K, l, ts)).cost_matrix)
        best = int(np.argmin(v))
        ties += int(np.count_nonzero(v == v[best]) > 1)
        hits += best < prefix
    observed = hits / trials
    target = 1 / math.e
    tol = sigmas * math.sqrt(target * (1 - target) / trials)
    return LemmaReport(
        "C1", target, observed, trials, tol, abs(observed - target) <= tol,
        {
            "K": K, "prefix": prefix, "exact_prefix_fraction": prefix / K,
            "claimed_lower_bound": target, "runs_with_tied_minimum": ties,
            "n": n, "l": l, "seed": seed,
        },
    )


@dataclass
class ScalingReport:
    rows: list[tuple[int, float]]
    ratios: list[dict]
    passed: bool

    def as_dict(self) -> dict:
        return {
            "timings": [{"K": k, "seconds": s} for k, s in self.rows],
            "ratios": self.ratios,
            "pass": self.passed,
        }


def check_runtime_scaling(
    pool: JobPool, l: int, K_values: Sequence[int], seed: int = 0, repeats: int = 5
) -> ScalingReport:
    """Wall time of allocation for each K (best of ``repeats``).

    For consecutive K values with ratio ``r`` the time ratio must fall in
    ``[0.75 r, 1.5 r]``.
    """
    if len(K_values) < 2:
        raise ConfigurationError("need at least two K values")
    rra(pool, RraConfig(min(K_values), l, seed))  # warm-up
    rows = []
    for K in K_values:
        best = math.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            rra(pool, RraConfig(K, l, seed))
            best = min(best, time.perf_counter() - t0)
        rows.append((int(K), best))
    ratios = []
    for (k1, t1), (k2, t2) in zip(rows, rows[1:]):
        r = k2 / k1
        lo, hi = 0.75 * r, 1.5 * r
        got = t2 / t1
        ratios.append({"from": k1, "to": k2, "ratio": got, "band": [lo, hi], "pass": lo <= got <= hi})
    return ScalingReport(rows, ratios, all(r["pass"] for r in ratios))


def run_lemmas(ids: Sequence[str], seed: int = 0, **scale) -> list[LemmaReport]:
    """Run the selected checks with default (or overridden) scale parameters."""
    unknown = [i for i in ids if i not in LEMMA_IDS]
    if unknown:
        raise ConfigurationError(f"unknown lemma id(s): {', '.join(unknown)}")
    p = {
        "l1_l": 3, "l1_J": 3, "l1_trials": 200_000,
        "n": 200, "l": 4, "l2_trials": 20_000,
        "l3_l": 4, "l3_trials": 20_000,
        "l4_trials": 100_000,
        "c1_K": 4000, "c1_trials": 2000,
    }
    p.update({k: v for k, v in scale.items() if v is not None})
    runners = {
        "L1": lambda: check_concentration(p["l1_l"], p["l1_J"], p["l1_trials"], seed),
        "L2": lambda: check_expected_load(p["n"], p["l"], p["l2_trials"], seed),
        "L3": lambda: check_coupon_collector(p["l3_l"], p["l3_trials"], seed),
        "L4": lambda: check_chernoff_tail(p["n"], p["l"], p["l4_trials"], seed),
        "C1": lambda: check_secretary(p["c1_K"], p["c1_trials"], seed),
    }
    return [runners[i]() for i in ids]
