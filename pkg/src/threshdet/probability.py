"""Empirical detection-probability estimators and the analytic Gaussian oracle.

The Monte Carlo estimator tallies single-detection frequencies over
counter-based noise chunks, so results are independent of worker count.
The analytic side expresses per-component crossing probabilities for
independent Gaussian noise through the Marcum Q-function (equivalently the
tail of a noncentral chi-squared distribution with two degrees of freedom).
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from . import detection, noise
from .noise import CHUNK, NoiseModel


class NoDetectionsAtAll(RuntimeWarning):
    """Flag type: conditional estimates are undefined without detections."""


class DomainTooSmall(ValueError):
    """Closed-form Marcum Q bounds require b > a."""


@dataclass
class DetectionStats:
    """Tallies and conditional frequencies for one measurement configuration."""

    counts: np.ndarray          # per-component single-detection counts
    no_detection: int
    multiple_detections: int
    trials: int
    eigenvalues: np.ndarray | None = None
    p_hat: np.ndarray = field(init=False)
    stderr: np.ndarray = field(init=False)

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        total = int(self.counts.sum()) + self.no_detection + self.multiple_detections
        if total != self.trials:
            raise ValueError("outcome counts do not sum to the trial count")
        n = self.n_detected
        if n > 0:
            self.p_hat = self.counts / n
            self.stderr = np.sqrt(self.p_hat * (1.0 - self.p_hat) / n)
        else:
            self.p_hat = np.full(self.counts.shape, np.nan)
            self.stderr = np.full(self.counts.shape, np.nan)

    @property
    def n_detected(self) -> int:
        return int(self.counts.sum())

    @property
    def detection_fraction(self) -> float:
        return self.n_detected / self.trials

    @property
    def P_hat(self) -> np.ndarray:
        """Unconditional single-detection frequencies P_n."""
        return self.counts / self.trials

    @property
    def P0_hat(self) -> float:
        return self.no_detection / self.trials

    @property
    def Pinf_hat(self) -> float:
        return self.multiple_detections / self.trials

    @property
    def mean(self) -> float:
        """Eigenvalue-weighted conditional mean (requires eigenvalues)."""
        if self.eigenvalues is None:
            raise ValueError("no eigenvalues attached to these statistics")
        return float(np.dot(self.eigenvalues, self.p_hat))

    @property
    def mean_stderr(self) -> float:
        # 1/sqrt(n) convention for the uncertainty of a +-1-valued mean.
        return 1.0 / np.sqrt(self.n_detected) if self.n_detected else np.inf


def _chunk_ranges(trials: int):
    for ci in range((trials + CHUNK - 1) // CHUNK):
        start = ci * CHUNK
        yield start, min(CHUNK, trials - start)


def _tally_chunk(args) -> np.ndarray:
    alpha, s, model, gamma, seed, stream, start, count, unitary = args
    a = noise.realize_block(alpha, s, model, seed, start, count, stream)
    if unitary is None:
        codes = detection.detect_standard_block(a, gamma)
    else:
        codes = detection.detect_observable_block(a, unitary, gamma)
    tally = np.zeros(model.dim + 2, dtype=np.int64)
    tally[:model.dim] = np.bincount(codes[codes >= 0], minlength=model.dim)
    tally[model.dim] = int((codes == detection.NO_DETECTION).sum())
    tally[model.dim + 1] = int((codes == detection.MULTIPLE_DETECTIONS).sum())
    return tally


def map_chunks(fn, jobs, workers: int = 1) -> list:
    """Apply a chunk worker to all jobs, optionally over a process pool.

    Reductions downstream are integer tallies keyed by chunk index, so the
    result is identical for any worker count.
    """
    jobs = list(jobs)
    if workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def estimate(alpha, s: float, model: NoiseModel, gamma: float, trials: int,
             seed: int, *, unitary=None, eigenvalues=None, stream: int = 0,
             workers: int = 1) -> DetectionStats:
    """Monte Carlo detection statistics for one measurement configuration.

    With ``unitary`` given, each realization is rotated by U† before
    threshold detection (measurement of the associated observable).
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    alpha = noise.check_normalized(alpha)
    jobs = [(alpha, s, model, gamma, seed, stream, start, count, unitary)
            for start, count in _chunk_ranges(trials)]
    tallies = map_chunks(_tally_chunk, jobs, workers)
    total = np.sum(tallies, axis=0)
    return DetectionStats(
        counts=total[:model.dim],
        no_detection=int(total[model.dim]),
        multiple_detections=int(total[model.dim + 1]),
        trials=trials,
        eigenvalues=None if eigenvalues is None else np.asarray(eigenvalues, float),
    )


def marcum_q1(a: float, b: float) -> float:
    """Marcum Q-function Q1(a, b), the tail of a noncentral chi-squared
    distribution with 2 degrees of freedom and noncentrality a² at b²."""
    if a < 0 or b < 0:
        raise ValueError("arguments must be non-negative")
    if b == 0.0:
        return 1.0
    if a == 0.0:
        return float(np.exp(-0.5 * b * b))
    return float(stats.ncx2.sf(b * b, 2, a * a))


def single_detection_probs(alpha, s: float, sigma: float,
                           gamma: float) -> np.ndarray:
    """Analytic single-detection probabilities P_n for independent Gaussian noise.

    With E[z z†] = I each real quadrature of a_i has variance sigma²/2, so
    2|a_i/sigma|² is noncentral chi-squared with two degrees of freedom and
    noncentrality 2|s·alpha_i/sigma|².  Independence across components gives
    P_n = (1 - F_n) * prod_{i != n} F_i with
    F_i = 1 - Q1(sqrt(2)·|s·alpha_i|/sigma, sqrt(2)·gamma/sigma); the sqrt(2)
    rescaling makes the formula agree with the Monte Carlo estimator.
    """
    alpha = noise.check_normalized(alpha)
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    lam = 2.0 * np.abs(s * alpha / sigma) ** 2
    b = np.sqrt(2.0) * gamma / sigma
    f = np.array([1.0 - marcum_q1(np.sqrt(l), b) for l in lam])
    probs = np.empty(alpha.shape[0])
    for n in range(alpha.shape[0]):
        others = np.prod(np.delete(f, n))
        probs[n] = (1.0 - f[n]) * others
    return probs


def no_detection_prob(alpha, s: float, sigma: float, gamma: float) -> float:
    """Analytic P_0 for independent Gaussian noise."""
    alpha = noise.check_normalized(alpha)
    lam = 2.0 * np.abs(s * alpha / sigma) ** 2
    b = np.sqrt(2.0) * gamma / sigma
    return float(np.prod([1.0 - marcum_q1(np.sqrt(l), b) for l in lam]))


def q1_bounds(a: float, b: float) -> tuple[float, float]:
    """Closed-form lower/upper envelopes of Q1(a, b), valid for b > a."""
    if a <= 0:
        raise ValueError("a must be positive")
    if b <= a:
        raise DomainTooSmall(f"bounds require b > a (got a={a}, b={b})")
    erfc = special.erfc((b - a) / np.sqrt(2.0))
    lower = erfc / np.sqrt(4.0 * a)
    upper = (np.exp(-0.5 * (b - a) ** 2) / np.sqrt(2.0 * np.pi * a)
             + np.sqrt(a / 4.0) * erfc)
    return float(lower), float(upper)
