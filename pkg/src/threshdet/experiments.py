"""Scripted end-to-end experiment reproductions.

Covers the two-dimensional warm-up configurations, the magic-square
contextuality Monte Carlo, joint and local CHSH runs, and the Bell-state
statistics checks, plus exact replay of injected realizations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import detection, linalg, noise, probability
from .detection import SubspacePartition
from .linalg import (H, I2, U_C1, U_C2, U_C3, U_R1, U_R2, U_R3, V, W_MINUS,
                     W_PLUS, X, Y, Z, ObservableSpec, tensor,
                     verify_diagonalization)
from .noise import CHUNK, NoiseModel

SQRT2 = np.sqrt(2.0)
BELL_STATE = np.array([0, 1, 1, 0], dtype=complex) / SQRT2
TSIRELSON_BOUND = 2.0 * SQRT2

# Stream ids keep every ensemble in an experiment statistically independent
# while staying reproducible from a single seed.
_STREAM_JOINT_BASE = 100
_STREAM_LOCAL_BASE = 200
_STREAM_BELL_STANDARD = 300
_STREAM_BELL_TILTED = 301
_STREAM_TWODIM_BASE = 400
_STREAM_MAGIC_STATES = 500
_STREAM_MAGIC_NOISE_BASE = 1000


def _diags(u, observables):
    return tuple(np.sign(verify_diagonalization(u, o)) for o in observables)


# Magic-square contexts: common diagonalizer plus the three sign diagonals,
# validated at import time against the operator definitions.
MAGIC_CONTEXTS: dict[str, tuple[np.ndarray, tuple[np.ndarray, ...], int]] = {
    "R1": (U_R1, _diags(U_R1, [tensor(X, I2), tensor(I2, X), tensor(X, X)]), +1),
    "R2": (U_R2, _diags(U_R2, [tensor(I2, Y), tensor(Y, I2), tensor(Y, Y)]), +1),
    "R3": (U_R3, _diags(U_R3, [tensor(X, Y), tensor(Y, X), tensor(Z, Z)]), +1),
    "C1": (U_C1, _diags(U_C1, [tensor(X, I2), tensor(I2, Y), tensor(X, Y)]), +1),
    "C2": (U_C2, _diags(U_C2, [tensor(I2, X), tensor(Y, I2), tensor(Y, X)]), +1),
    "C3": (U_C3, _diags(U_C3, [tensor(X, X), tensor(Y, Y), tensor(Z, Z)]), -1),
}

# Joint CHSH observables: A = Z(x)I, A' = X(x)I paired with the tilted
# B = I(x)B+ and B' = I(x)B-, measured through one product unitary each.
_AB_OPERATORS = {
    "AB": (tensor(I2, W_PLUS), tensor(Z, linalg.B_PLUS)),
    "AB'": (tensor(I2, W_MINUS), tensor(Z, linalg.B_MINUS)),
    "A'B": (tensor(H, W_PLUS), tensor(X, linalg.B_PLUS)),
    "A'B'": (tensor(H, W_MINUS), tensor(X, linalg.B_MINUS)),
}
JOINT_OBSERVABLES: dict[str, ObservableSpec] = {
    name: ObservableSpec.from_observable(u, op)
    for name, (u, op) in _AB_OPERATORS.items()
}

# Local CHSH: Alice measures the left factor through a subspace partition,
# Bob the right factor; eigenvalue groups follow the diagonals of the
# rotated operators.
ALICE_SETTINGS = {
    "A": (tensor(I2, I2), SubspacePartition(((0, 1), (2, 3)), (+1.0, -1.0))),
    "A'": (tensor(H, I2), SubspacePartition(((0, 1), (2, 3)), (+1.0, -1.0))),
}
BOB_SETTINGS = {
    "B": (tensor(I2, W_PLUS), SubspacePartition(((1, 3), (0, 2)), (+1.0, -1.0))),
    "B'": (tensor(I2, W_MINUS), SubspacePartition(((0, 2), (1, 3)), (+1.0, -1.0))),
}
LOCAL_PAIRS = (("A", "B"), ("A", "B'"), ("A'", "B"), ("A'", "B'"))


@dataclass
class ObservableRow:
    name: str
    counts: np.ndarray
    n: int
    mean: float
    stderr: float
    detection_fraction: float


@dataclass
class ChshJointResult:
    noise_kind: str
    trials: int
    rows: list[ObservableRow]
    s_d: float
    s_d_err: float
    s_quantum: float = TSIRELSON_BOUND

    @property
    def means(self) -> list[float]:
        return [r.mean for r in self.rows]


@dataclass
class PairRow:
    alice: str
    bob: str
    counts: np.ndarray          # coincidences: (++, +-, -+, --)
    total: int
    mean: float
    stderr: float


@dataclass
class ChshLocalResult:
    noise_kind: str
    trials: int
    rows: list[PairRow]
    s_d: float
    s_d_err: float
    singles_fraction: float
    coincidence_fraction: float
    efficiency: float


@dataclass
class MagicSquareResult:
    num_states: int
    trials_per_state: int
    context_detections: dict[str, int]
    violation_count: int
    six_way_overlap: int

    @property
    def six_way_intersection_empty(self) -> bool:
        return self.six_way_overlap == 0


@dataclass
class BellStateResult:
    trials: int
    standard_counts: np.ndarray
    standard_p_hat: np.ndarray
    tilted_counts: np.ndarray
    tilted_p_hat: np.ndarray
    tilted_stderr: np.ndarray
    quantum_tilted: np.ndarray = field(
        default_factory=lambda: np.abs(
            BELL_STATE @ np.conj(tensor(I2, W_PLUS))) ** 2)


@dataclass
class TwoDimRow:
    name: str
    kind: str
    s: float
    gamma: float
    p0: float
    p1: float
    p2: float
    p_inf: float


def run_two_dim_examples(trials: int, seed: int, *, sigma: float = 1.0,
                         workers: int = 1) -> list[TwoDimRow]:
    """Estimate (P0, P1, P2, Pinf) for the four scripted 2-dim noise setups."""
    basis = np.array([1.0, 0.0], dtype=complex)
    plus = np.array([1.0, 1.0], dtype=complex) / SQRT2
    s_theorem1 = (SQRT2 - 1.0) * sigma
    configs = [
        ("single-phase basis state", noise.SINGLE_PHASE, basis, 1.1 * sigma),
        ("anti-correlated superposition", noise.ANTICORRELATED_PHASE, plus,
         1.001 * sigma),
        ("bloch-uniform basis state", noise.BLOCH_UNIFORM, basis, s_theorem1),
        ("bloch-uniform superposition", noise.BLOCH_UNIFORM, plus, s_theorem1),
    ]
    rows = []
    for i, (name, kind, alpha, s) in enumerate(configs):
        model = NoiseModel(kind, sigma, 2)
        stats = probability.estimate(alpha, s, model, sigma, trials, seed,
                                     stream=_STREAM_TWODIM_BASE + i,
                                     workers=workers)
        rows.append(TwoDimRow(name=name, kind=kind, s=s, gamma=sigma,
                              p0=stats.P0_hat, p1=float(stats.P_hat[0]),
                              p2=float(stats.P_hat[1]),
                              p_inf=stats.Pinf_hat))
    return rows


def run_chsh_joint(noise_kind: str, trials: int, seed: int, *,
                   workers: int = 1) -> ChshJointResult:
    """Joint four-dimensional CHSH run with independent ensembles per observable."""
    if noise_kind == noise.SPHERE:
        sigma, s, gamma = 1.0, SQRT2 - 1.0, 1.0
    elif noise_kind == noise.GAUSSIAN:
        sigma, s, gamma = 1.0, 1.0, 3.0
    else:
        raise ValueError(f"unsupported noise kind for this run: {noise_kind}")
    model = NoiseModel(noise_kind, sigma, 4)
    rows = []
    for i, (name, obs) in enumerate(JOINT_OBSERVABLES.items()):
        stats = probability.estimate(BELL_STATE, s, model, gamma, trials, seed,
                                     unitary=obs.unitary,
                                     eigenvalues=obs.eigenvalues,
                                     stream=_STREAM_JOINT_BASE + i,
                                     workers=workers)
        rows.append(ObservableRow(name=name, counts=stats.counts.copy(),
                                  n=stats.n_detected, mean=stats.mean,
                                  stderr=stats.mean_stderr,
                                  detection_fraction=stats.detection_fraction))
    e = [r.mean for r in rows]
    s_d = abs(e[0] + e[1]) + abs(e[2] - e[3])
    s_d_err = sum(r.stderr for r in rows)
    return ChshJointResult(noise_kind=noise_kind, trials=trials, rows=rows,
                           s_d=s_d, s_d_err=s_d_err)


def _local_chunk(args) -> np.ndarray:
    seed, pair_index, start, count, kind, s, sigma, gamma = args
    alice_name, bob_name = LOCAL_PAIRS[pair_index]
    ua, parta = ALICE_SETTINGS[alice_name]
    ub, partb = BOB_SETTINGS[bob_name]
    model = NoiseModel(kind, sigma, 4)
    a = noise.realize_block(BELL_STATE, s, model, seed, start, count,
                            _STREAM_LOCAL_BASE + pair_index)
    ca = detection.detect_projective_block(a, ua, parta, gamma)
    cb = detection.detect_projective_block(a, ub, partb, gamma)
    da, db = ca >= 0, cb >= 0
    coinc = da & db
    # joint outcome cell: 2*alice_group + bob_group over coincidences
    cell = 2 * ca[coinc] + cb[coinc]
    out = np.zeros(6, dtype=np.int64)
    out[:4] = np.bincount(cell, minlength=4)
    out[4] = int((da | db).sum())
    out[5] = int(coinc.sum())
    return out


def run_chsh_local(trials: int, seed: int, *, noise_kind: str = noise.SPHERE,
                   workers: int = 1) -> ChshLocalResult:
    """Local CHSH game: Alice and Bob measure the shared realization
    separately through subspace partitions; only coincidences are scored."""
    sigma, gamma = 1.0, 1.0
    s = (SQRT2 - 1.0) * sigma
    jobs = []
    for pair_index in range(len(LOCAL_PAIRS)):
        for start, count in probability._chunk_ranges(trials):
            jobs.append((seed, pair_index, start, count, noise_kind, s, sigma,
                         gamma))
    results = probability.map_chunks(_local_chunk, jobs, workers)
    per_pair = np.zeros((len(LOCAL_PAIRS), 6), dtype=np.int64)
    for job, res in zip(jobs, results):
        per_pair[job[1]] += res
    rows = []
    for (alice, bob), tall in zip(LOCAL_PAIRS, per_pair):
        counts = tall[:4]
        total = int(counts.sum())
        mean = (counts[0] - counts[1] - counts[2] + counts[3]) / total \
            if total else np.nan
        stderr = 1.0 / np.sqrt(total) if total else np.inf
        rows.append(PairRow(alice=alice, bob=bob, counts=counts.copy(),
                            total=total, mean=float(mean), stderr=stderr))
    e = [r.mean for r in rows]
    s_d = abs(e[0] + e[1]) + abs(e[2] - e[3])
    s_d_err = sum(r.stderr for r in rows)
    singles = int(per_pair[:, 4].sum())
    coincidences = int(per_pair[:, 5].sum())
    n_total = trials * len(LOCAL_PAIRS)
    return ChshLocalResult(
        noise_kind=noise_kind, trials=trials, rows=rows, s_d=s_d,
        s_d_err=s_d_err, singles_fraction=singles / n_total,
        coincidence_fraction=coincidences / n_total,
        efficiency=coincidences / singles if singles else np.nan)


def random_state(seed: int, state_index: int, dim: int = 4) -> np.ndarray:
    """Deterministic random design state z/||z|| for one magic-square run."""
    rng = noise._chunk_rng(seed, _STREAM_MAGIC_STATES, state_index)
    x = rng.standard_normal(2 * dim)
    z = x[:dim] + 1j * x[dim:]
    return z / np.linalg.norm(z)


def _magic_chunk(args) -> np.ndarray:
    seed, state_index, start, count, s, sigma, gamma = args
    alpha = random_state(seed, state_index)
    model = NoiseModel(noise.SPHERE, sigma, 4)
    a = noise.realize_block(alpha, s, model, seed, start, count,
                            _STREAM_MAGIC_NOISE_BASE + state_index)
    det_counts = np.zeros(len(MAGIC_CONTEXTS), dtype=np.int64)
    violations = np.zeros(len(MAGIC_CONTEXTS), dtype=np.int64)
    detected_all = np.ones(count, dtype=bool)
    for i, (u, diags, expected) in enumerate(MAGIC_CONTEXTS.values()):
        codes = detection.detect_observable_block(a, u, gamma)
        det = codes >= 0
        det_counts[i] = int(det.sum())
        product = (diags[0] * diags[1] * diags[2])[codes[det]]
        violations[i] = int((product != expected).sum())
        detected_all &= det
    return np.concatenate([det_counts, violations,
                           [int(detected_all.sum())]])


def run_magic_square(num_states: int, trials_per_state: int, seed: int, *,
                     workers: int = 1) -> MagicSquareResult:
    """Measure all six magic-square contexts on shared realizations of
    random four-dimensional states; tally product violations (always zero)
    and the six-way detection overlap (always empty)."""
    sigma = 1.0
    s = (SQRT2 - 1.0) * sigma
    jobs = []
    for state_index in range(num_states):
        for start, count in probability._chunk_ranges(trials_per_state):
            jobs.append((seed, state_index, start, count, s, sigma, sigma))
    results = probability.map_chunks(_magic_chunk, jobs, workers)
    total = np.sum(results, axis=0)
    k = len(MAGIC_CONTEXTS)
    return MagicSquareResult(
        num_states=num_states, trials_per_state=trials_per_state,
        context_detections={name: int(total[i])
                            for i, name in enumerate(MAGIC_CONTEXTS)},
        violation_count=int(total[k:2 * k].sum()),
        six_way_overlap=int(total[2 * k]))


def run_bell_state_checks(trials: int, seed: int, *,
                          workers: int = 1) -> BellStateResult:
    """Bell-state statistics: perfect anti-correlation in the standard basis
    and the four-outcome conditional distribution of the tilted observable."""
    sigma = 1.0
    s = (SQRT2 - 1.0) * sigma
    model = NoiseModel(noise.SPHERE, sigma, 4)
    std = probability.estimate(BELL_STATE, s, model, sigma, trials, seed,
                               stream=_STREAM_BELL_STANDARD, workers=workers)
    tilted = probability.estimate(BELL_STATE, s, model, sigma, trials, seed,
                                  unitary=tensor(I2, W_PLUS),
                                  stream=_STREAM_BELL_TILTED, workers=workers)
    return BellStateResult(trials=trials,
                           standard_counts=std.counts.copy(),
                           standard_p_hat=std.p_hat.copy(),
                           tilted_counts=tilted.counts.copy(),
                           tilted_p_hat=tilted.p_hat.copy(),
                           tilted_stderr=tilted.stderr.copy())


# --- exact replay of injected realizations ------------------------------

PAULI_SPECS = {
    "Z": ObservableSpec(I2, [1.0, -1.0]),
    "X": ObservableSpec(H, [1.0, -1.0]),
    "Y": ObservableSpec(V, [1.0, -1.0]),
}


def replay_pauli(w, *, s: float = SQRT2 - 1.0, gamma: float = 1.0) -> dict:
    """Measure Z, X, Y on the single realization a = s·[1,0] + w."""
    a = noise.inject(np.array([1.0, 0.0]), s, w)
    return {name: detection.measure_observable(a, spec, gamma)
            for name, spec in PAULI_SPECS.items()}


def replay_magic_square(a, *, gamma: float = 1.0) -> dict:
    """Six-context triple outcomes for one injected amplitude vector."""
    out = {}
    for name, (u, diags, _) in MAGIC_CONTEXTS.items():
        out[name] = detection.measure_triple(a, u, diags, gamma)
    return out


def replay_local(a, *, gamma: float = 1.0) -> dict:
    """Alice/Bob outcome strings for one injected realization."""
    out = {}
    for name, (u, part) in {**ALICE_SETTINGS, **BOB_SETTINGS}.items():
        res = detection.measure_projective(a, u, part, gamma)
        out[name] = f"{res.value:+.0f}" if res.detected else "NaN"
    return out
