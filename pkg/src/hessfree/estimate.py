"""Search engines that turn probes into certificates.

estimate_L maximizes the probe ratio to produce a replayable lower-bound
certificate for the Lipschitz constant of F'; falsify looks for a single
probe that violates the claimed constant; cross_validate compares the
probe-based estimate against the independent finite-difference route.

Probes are drawn in batches of 512, each batch owning its own generator
spawned from (seed, stream, batch index).  The probe sequence therefore
depends only on the budget and seed, never on the worker count, and the
max-ratio reduction breaks ties by stream position, so certificates are
bit-identical across reruns and thread counts.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .oracles import DomainSampler, ScalarOracle, VectorOracle, as_vector_oracle, lip_from_hessians, lip_from_jacobians
from .probe import ProbeResult, best_t_probe, jensen_probe
from .vecspace import Configuration, SimplexWeights

RNG_ALGORITHM = "numpy-pcg64/seedseq(seed,stream,batch)"

_BATCH = 512
STREAM_PAIRS = 0
STREAM_CONFIGS = 1
STREAM_FD = 2
STREAM_CHECKS = 3

# relative and absolute slack when testing a probe against a claimed L
VIOLATION_RTOL = 1e-8
VIOLATION_ATOL_COEFF = 1e-12

# Candidate probes must carry a spread comfortably above rounding noise
# in the gap (which is of order eps * value scale); otherwise the
# 2 gap / spread ratio of a *sound* oracle can read high by far more
# than the certificate tolerances.  This threshold is deliberately much
# larger than the probe-level spread floor.
INFORMATIVE_SPREAD_COEFF = 1e-4

_ASCENT_SHRINK = 0.7
_ASCENT_LEVELS = 8


class ProbeLog:
    """Counts probes; optionally keeps (kind, result) rows for reports."""

    __slots__ = ("count", "rows", "collect")

    def __init__(self, collect: bool = False):
        self.count = 0
        self.collect = collect
        self.rows: list[tuple[str, ProbeResult]] = []

    def add(self, kind: str, result: ProbeResult) -> None:
        self.count += 1
        if self.collect:
            self.rows.append((kind, result))


class NoInformativeProbeError(RuntimeError):
    """Every probe in the budget had spread below the informative floor."""


@dataclass(frozen=True)
class SearchBudget:
    """Probe counts, ascent steps and sampling geometry for one search."""

    random_configs: int = 4000
    ascent_steps: int = 2000
    two_point_pairs: int = 4000
    seed: int = 0
    max_n: int = 4
    domain_radius: float = 5.0

    def __post_init__(self):
        for name in ("random_configs", "ascent_steps", "two_point_pairs"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.random_configs == 0 and self.two_point_pairs == 0:
            raise ValueError("need random_configs > 0 or two_point_pairs > 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.max_n < 2:
            raise ValueError("max_n must be >= 2")
        if not (self.domain_radius >= 0.0 and math.isfinite(self.domain_radius)):
            raise ValueError("domain_radius must be finite and >= 0")


@dataclass(frozen=True)
class LowerBoundCertificate:
    """Replayable witness that the best Lipschitz constant is >= l_lower."""

    l_lower: float
    witness: ProbeResult
    probes_used: int
    oracle_label: str
    budget: SearchBudget
    rng_algorithm: str = RNG_ALGORITHM


@dataclass(frozen=True)
class ViolationCertificate:
    """Replayable probe whose gap exceeds (claimed_L / 2) * spread beyond
    tolerance, refuting the claimed constant."""

    claimed_l: float
    witness: ProbeResult
    margin: float
    probes_used: int
    oracle_label: str
    budget: SearchBudget
    rng_algorithm: str = RNG_ALGORITHM


@dataclass(frozen=True)
class CrossValidationReport:
    """Probe-based vs finite-difference Lipschitz estimates."""

    oracle_label: str
    l_probe: float
    l_fd: float
    consistent: bool
    cv_tol: float
    certificate: LowerBoundCertificate
    fd_pairs: int
    domain_radius: float


def stream_rng(seed: int, stream: int, batch: int = 0) -> np.random.Generator:
    """Generator for one (stream, batch) cell of the seed's lattice."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, batch)))


def _worker_count() -> int:
    env = os.environ.get("HESSFREE_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def informative_floor(r: ProbeResult) -> float:
    return INFORMATIVE_SPREAD_COEFF * (1.0 + r.point_scale) ** 2


def _candidate_ratio(r: ProbeResult) -> float:
    """Ratio used for candidate selection: -inf when absent or when the
    spread is too small for the ratio to be numerically trustworthy."""
    if r.ratio is None or r.spread < informative_floor(r):
        return -math.inf
    return r.ratio


def violation_tolerance(r: ProbeResult, claimed_l: float) -> float:
    return (
        VIOLATION_RTOL * 0.5 * claimed_l * r.spread
        + VIOLATION_ATOL_COEFF * (1.0 + r.value_scale)
    )


def violates(r: ProbeResult, claimed_l: float) -> bool:
    """gap > (claimed_L / 2) spread + tolerance."""
    return r.gap - 0.5 * claimed_l * r.spread > violation_tolerance(r, claimed_l)


def sample_configuration(
    rng: np.random.Generator, dim: int, max_n: int, radius: float
) -> Configuration:
    """n uniform in {2..max_n}, Gaussian points at RMS radius, weights
    Dirichlet(1,..,1) via normalized unit-rate exponentials."""
    n = int(rng.integers(2, max_n + 1))
    pts = rng.standard_normal((n, dim)) * (radius / math.sqrt(dim))
    e = rng.standard_exponential(n)
    w = e / e.sum()
    return Configuration(pts, SimplexWeights(w))


def _batched(total: int, fn_batch: Callable[[int, int, int], list], workers: int) -> Iterator:
    """Run fn_batch(batch_index, start, count) over ceil(total/_BATCH)
    batches, yielding results in batch order regardless of worker count."""
    n_batches = (total + _BATCH - 1) // _BATCH
    args = [
        (b, b * _BATCH, min(_BATCH, total - b * _BATCH)) for b in range(n_batches)
    ]
    if workers <= 1 or n_batches <= 1:
        for a in args:
            yield from fn_batch(*a)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for chunk in pool.map(lambda a: fn_batch(*a), args):
            yield from chunk


# probes evaluated inside one best_t_probe call: 31 grid + 2 + 20 golden
_T_PROBES_PER_PAIR = 53


def _two_point_results(
    F: VectorOracle, budget: SearchBudget, log: ProbeLog, workers: int
) -> Iterator[ProbeResult]:
    scale = budget.domain_radius / math.sqrt(F.dim_in)

    def batch(b: int, start: int, count: int) -> list[ProbeResult]:
        rng = stream_rng(budget.seed, STREAM_PAIRS, b)
        out = []
        for _ in range(count):
            x = rng.standard_normal(F.dim_in) * scale
            y = rng.standard_normal(F.dim_in) * scale
            out.append(best_t_probe(F, x, y, min_spread_coeff=INFORMATIVE_SPREAD_COEFF))
        return out

    for r in _batched(budget.two_point_pairs, batch, workers):
        # only the per-pair maximum is kept as a row; count all evals
        log.count += _T_PROBES_PER_PAIR - 1
        log.add("two_point", r)
        yield r


def _config_results(
    F: VectorOracle, budget: SearchBudget, log: ProbeLog, workers: int
) -> Iterator[ProbeResult]:
    def batch(b: int, start: int, count: int) -> list[ProbeResult]:
        rng = stream_rng(budget.seed, STREAM_CONFIGS, b)
        out = []
        for _ in range(count):
            c = sample_configuration(rng, F.dim_in, budget.max_n, budget.domain_radius)
            out.append(jensen_probe(F, c))
        return out

    for r in _batched(budget.random_configs, batch, workers):
        log.add("config", r)
        yield r


def _ascend(
    F: VectorOracle,
    start: ProbeResult,
    steps: int,
    radius: float,
    log: ProbeLog,
    stop: Callable[[ProbeResult], bool] | None = None,
) -> ProbeResult:
    """Coordinate-perturbation hill climb on the ratio.

    One point coordinate moves at a time (weights stay fixed); a move is
    accepted only if the ratio strictly increases.  The step shrinks
    geometrically by 0.7 after every sweep without an accepted move,
    through 8 levels.
    """
    best = start
    if steps <= 0:
        return best
    pts = np.array(best.config.points)
    w = best.config.weights
    base = 0.5 * (1.0 + radius)
    level = 0
    used = 0
    n, d = pts.shape
    while used < steps and level < _ASCENT_LEVELS:
        step = base * _ASCENT_SHRINK**level
        accepted = False
        for i in range(n):
            for k in range(d):
                for s in (1.0, -1.0):
                    if used >= steps:
                        return best
                    trial = pts.copy()
                    trial[i, k] += s * step
                    r = jensen_probe(F, Configuration(trial, w))
                    used += 1
                    log.add("ascent", r)
                    if stop is not None and stop(r):
                        return r
                    if _candidate_ratio(r) > _candidate_ratio(best):
                        best, pts = r, trial
                        accepted = True
        if not accepted:
            level += 1
    return best


def _search(
    F: VectorOracle,
    budget: SearchBudget,
    log: ProbeLog,
    stop: Callable[[ProbeResult], bool] | None,
    workers: int | None,
) -> tuple[ProbeResult | None, ProbeResult | None]:
    """Shared two-point + random-config + ascent pipeline.

    Returns (best informative probe, first probe satisfying stop).
    """
    workers = _worker_count() if workers is None else workers
    best: ProbeResult | None = None
    for phase in (_two_point_results, _config_results):
        for r in phase(F, budget, log, workers):
            if stop is not None and stop(r):
                return best, r
            if best is None or _candidate_ratio(r) > _candidate_ratio(best):
                best = r
    if best is not None and _candidate_ratio(best) > -math.inf:
        r = _ascend(F, best, budget.ascent_steps, budget.domain_radius, log, stop=stop)
        if stop is not None and stop(r):
            return best, r
        if _candidate_ratio(r) > _candidate_ratio(best):
            best = r
    return best, None


def estimate_L(
    F: VectorOracle | ScalarOracle,
    budget: SearchBudget,
    log: ProbeLog | None = None,
    workers: int | None = None,
) -> LowerBoundCertificate:
    """Lower-bound the Lipschitz constant of F' by the best probe ratio.

    Scalar oracles are probed through their gradient map.  Raises
    NoInformativeProbeError when every probe is spread-degenerate.
    """
    F = as_vector_oracle(F)
    log = log if log is not None else ProbeLog()
    best, _ = _search(F, budget, log, stop=None, workers=workers)
    if best is None or _candidate_ratio(best) == -math.inf:
        raise NoInformativeProbeError(
            f"no informative probe for {F.label!r}: every sampled spread "
            "was below the informative floor"
        )
    return LowerBoundCertificate(
        l_lower=best.ratio,
        witness=best,
        probes_used=log.count,
        oracle_label=F.label,
        budget=budget,
    )


def falsify(
    F: VectorOracle | ScalarOracle,
    claimed_l: float,
    budget: SearchBudget,
    log: ProbeLog | None = None,
    workers: int | None = None,
) -> ViolationCertificate | None:
    """Search for a probe violating gap <= (claimed_L / 2) spread.

    Returns the first violation found, or None when the budget is
    exhausted.  None is *not* a proof that claimed_l is valid; it only
    means this search found no counterexample.
    """
    if claimed_l < 0.0:
        raise ValueError("claimed_l must be >= 0")
    F = as_vector_oracle(F)
    log = log if log is not None else ProbeLog()
    _, hit = _search(F, budget, log, stop=lambda r: violates(r, claimed_l), workers=workers)
    if hit is None:
        return None
    return ViolationCertificate(
        claimed_l=claimed_l,
        witness=hit,
        margin=hit.gap - 0.5 * claimed_l * hit.spread,
        probes_used=log.count,
        oracle_label=F.label,
        budget=budget,
    )


def replay(witness: ProbeResult, F: VectorOracle | ScalarOracle) -> ProbeResult:
    """Re-evaluate a certificate's witness configuration."""
    return jensen_probe(as_vector_oracle(F), witness.config)


CV_TOL = 5e-2
_CV_ABS = 1e-8  # keeps the flag meaningful when both estimates are noise-level zeros


def cross_validate(
    o: ScalarOracle | VectorOracle,
    budget: SearchBudget,
    fd_pairs: int = 10_000,
    log: ProbeLog | None = None,
    workers: int | None = None,
) -> CrossValidationReport:
    """Probe-based estimate vs the finite-difference derivative estimate
    on the same domain; consistent iff L_probe <= L_fd (1 + CV_TOL) up to
    an absolute floor."""
    cert = estimate_L(o, budget, log=log, workers=workers)
    sampler = DomainSampler(
        o.dim if isinstance(o, ScalarOracle) else o.dim_in, budget.domain_radius
    )
    rng = stream_rng(budget.seed, STREAM_FD, 0)
    if isinstance(o, ScalarOracle):
        l_fd = lip_from_hessians(o, sampler, fd_pairs, rng)
    else:
        l_fd = lip_from_jacobians(o, sampler, fd_pairs, rng)
    consistent = cert.l_lower <= l_fd * (1.0 + CV_TOL) + _CV_ABS
    return CrossValidationReport(
        oracle_label=cert.oracle_label,
        l_probe=cert.l_lower,
        l_fd=l_fd,
        consistent=bool(consistent),
        cv_tol=CV_TOL,
        certificate=cert,
        fd_pairs=fd_pairs,
        domain_radius=budget.domain_radius,
    )
