"""
    rhopriv.oracle
    ~~~~~~~~~~~~~~

    Independent checks of the closed forms: exhaustive grid search over
    feasible mechanisms, Monte-Carlo simulation of the query protocol and
    exact rational arithmetic.
"""
from __future__ import annotations

import functools
import math
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from . import _const, _helper, _logging, err, g
from .bounds import predicate_privacy_closed, rho_privacy_closed
from .mechanisms import (
    AddNoiseMechanism,
    Mechanism,
    as_row_lifted,
    build_Wo,
    build_Wo_predicate,
)
from .model import DataModel, support_stats
from .privacy import predicate_privacy, privacy_single

__all__ = (
    'SearchConfig',
    'SimResult',
    'search_optimal_mechanism',
    'search_optimal_predicate',
    'simulate_protocol',
    'rational_crosscheck',
    'rational_build_Wo',
    'rational_build_V1',
    'random_feasible_mechanism',
)

logger = _logging.create_logger()

MODES = ('float', 'rational')


class SearchConfig:
    """ Grid of the exhaustive mechanism search.

    :param grid_step: probability increment of every mechanism entry
    :param rho: recoverability constraint W(f(x)|x) >= rho
    :param max_cells: cap on the candidate combinations held at once
    :param mode: 'float' or 'rational' (the optimum is re-evaluated
        exactly in rational mode)
    """

    def __init__(
        self,
        grid_step: Any = 0.05,
        rho: Any = 0.0,
        max_cells: int = _const.CAP.SEARCH,
        mode: str = 'float',
    ) -> None:
        if mode not in MODES:
            raise err.InvalidValueError(f"mode must be one of {MODES}")
        if mode == 'rational':
            step = Fraction(grid_step)
            if step <= 0 or (1 / step).denominator != 1:
                raise err.InvalidValueError(
                    f"grid step {grid_step} does not divide 1")
            units = int(1 / step)
        else:
            step = float(grid_step)
            if step <= 0:
                raise err.InvalidValueError("grid step must be positive")
            units = int(round(1.0 / step))
            if abs(units * step - 1.0) > 1e-9:
                raise err.InvalidValueError(
                    f"grid step {grid_step} does not divide 1")
        self.grid_step = step
        self.units = units
        self.rho = rho
        self.max_cells = int(max_cells)
        self.mode = mode

    def __repr__(self) -> str:
        return (f"<SearchConfig step={self.grid_step} rho={self.rho}"
                f" mode={self.mode}>")

    __str__ = __repr__

    def slack(self, r: int, k: int) -> float:
        """r * k * grid_step."""
        return r * k * float(self.grid_step)

    def min_units(self) -> int:
        """Smallest on-grid W(f(x)|x) satisfying the constraint."""
        need = Fraction(self.rho) * self.units if self.mode == 'rational' \
            else float(self.rho) * self.units - 1e-9
        return max(0, int(math.ceil(need)))


def _feasible_rows(units: int, k: int, i: int, lowest: int) -> np.ndarray:
    """All grid rows with at least ``lowest`` units on column i, as
    integer unit counts; the rest is a composition of the off-i mass."""
    rows = []
    for keep in range(lowest, units + 1):
        for rest in _helper.compositions(units - keep, k - 1):
            rows.append(rest[:i] + (keep,) + rest[i:])
    return np.array(rows, dtype=int)


def _pareto(states: np.ndarray, picks: np.ndarray
            ) -> Tuple[np.ndarray, np.ndarray]:
    """Drop duplicate states and states dominated coordinatewise; the
    objectives searched are nondecreasing in every coordinate."""
    states, index = np.unique(states, axis=0, return_index=True)
    picks = picks[index]
    order = np.argsort(states.sum(axis=1), kind='stable')
    states, picks = states[order], picks[order]
    alive = np.ones(states.shape[0], dtype=bool)
    for a in range(states.shape[0]):
        if not alive[a]:
            continue
        later = np.arange(a + 1, states.shape[0])
        later = later[alive[later]]
        dominated = np.all(states[later] >= states[a], axis=1)
        alive[later[dominated]] = False
    return states[alive], picks[alive]


def _search_partition(
    contributions: Sequence[np.ndarray],
    combine: str,
    max_cells: int,
    first: Tuple[int, int],
) -> Tuple[np.ndarray, np.ndarray]:
    """ Stagewise exhaustive search: state after the first t rows is the
    vector the objective is built from (column maxima or grouped sums);
    ``first`` restricts the candidates of row 0.
    """
    head = contributions[0][first[0]:first[1]]
    states = head
    picks = np.arange(first[0], first[1])[:, None]
    for contrib in contributions[1:]:
        size = states.shape[0] * contrib.shape[0]
        if size > max_cells:
            raise err.SearchSpaceTooLarge(size=size, cap=max_cells)
        if combine == 'max':
            merged = np.maximum(states[:, None, :], contrib[None, :, :])
        else:
            merged = states[:, None, :] + contrib[None, :, :]
        merged = merged.reshape(size, -1)
        picks = np.hstack([
            np.repeat(picks, contrib.shape[0], axis=0),
            np.tile(np.arange(contrib.shape[0]), states.shape[0])[:, None],
        ])
        states, picks = _pareto(merged, picks)
    return states, picks


def _run_search(
    contributions: List[np.ndarray],
    combine: str,
    objective: Any,
    config: SearchConfig,
    workers: int,
) -> Tuple[np.ndarray, float]:
    count = contributions[0].shape[0]
    parts = max(1, min(workers, count))
    edges = np.linspace(0, count, parts + 1).round().astype(int)
    jobs = [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]
    func = functools.partial(_search_partition, contributions, combine,
                             config.max_cells)
    if len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=parts) as pool:
            results = list(pool.map(func, jobs))
    else:
        results = [func(job) for job in jobs]
    best_value, best_pick = math.inf, None
    for states, picks in results:
        values = np.array([objective(s) for s in states])
        at = int(np.argmin(values))
        if values[at] < best_value:
            best_value, best_pick = float(values[at]), picks[at]
    return best_pick, best_value


def _grid_mechanism(
    model: DataModel, rho: Any, config: SearchConfig,
    objective_kind: str, workers: Optional[int],
) -> Tuple[Mechanism, np.ndarray]:
    workers = g.workers(workers)
    lowest = config.min_units()
    if lowest > config.units:
        raise err.InvalidValueError(f"rho={rho} infeasible on the grid")
    rows = [_feasible_rows(config.units, model.k, int(model.f[x]), lowest)
            for x in range(model.r)]
    logger.debug("grid search: %s candidate rows per symbol",
                 [len(r) for r in rows])
    scale = 1.0 / config.units
    if objective_kind == 'privacy':
        contributions = [model.px[x] * rows[x] * scale
                         for x in range(model.r)]
        combine = 'max'

        def objective(state: np.ndarray) -> float:
            return _helper.fsum(state)
    else:
        m, k = model.m, model.k
        contributions = []
        for x in range(model.r):
            block = np.zeros((rows[x].shape[0], m, k))
            block[:, int(model.h[x]), :] = model.px[x] * rows[x] * scale
            contributions.append(block.reshape(rows[x].shape[0], m * k))
        combine = 'sum'

        def objective(state: np.ndarray) -> float:
            return _helper.fsum(state.reshape(m, k).max(axis=0))

    pick, _ = _run_search(contributions, combine, objective, config, workers)
    units = np.array([rows[x][pick[x]] for x in range(model.r)])
    return Mechanism(units * scale, rho=float(rho)), units


def search_optimal_mechanism(
    model: DataModel,
    rho: Any,
    config: Optional[SearchConfig] = None,
    workers: Optional[int] = None,
) -> Tuple[Mechanism, Any]:
    """ Best grid mechanism for hiding X under rho-recoverability. The
    optimum may not beat the closed form by more than the grid slack and
    W_o must come within the slack of it.
    """
    config = config if config is not None else SearchConfig(rho=rho)
    w, units = _grid_mechanism(model, rho, config, 'privacy', workers)
    value: Any = privacy_single(model, w).value
    if config.mode == 'rational':
        px = [Fraction(repr(float(p))) for p in model.px]
        total = sum(px)
        value = rational_crosscheck(
            [p / total for p in px],
            [[Fraction(int(u), config.units) for u in row] for row in units])
    stats = support_stats(model)
    closed = rho_privacy_closed(model, stats, float(rho))
    achieved = privacy_single(model, build_Wo(model, stats, float(rho))).value
    slack = config.slack(model.r, model.k)
    if float(value) > closed + slack:
        raise err.InvariantViolation(
            f"grid optimum {float(value)!r} beats the closed form {closed!r}")
    if achieved < float(value) - slack:
        raise err.InvariantViolation(
            f"W_o privacy {achieved!r} below the grid optimum")
    return w, value


def search_optimal_predicate(
    model: DataModel,
    rho: Any,
    config: Optional[SearchConfig] = None,
    workers: Optional[int] = None,
) -> Tuple[Mechanism, float]:
    if not model.has_predicate:
        raise err.NoPredicate
    config = config if config is not None else SearchConfig(rho=rho)
    w, _ = _grid_mechanism(model, rho, config, 'predicate', workers)
    value = predicate_privacy(model, w).value
    stats = support_stats(model)
    closed = predicate_privacy_closed(model, stats, float(rho))
    achieved = predicate_privacy(
        model, build_Wo_predicate(model, stats, float(rho))).value
    slack = config.slack(model.r, model.k)
    if value > closed + slack:
        raise err.InvariantViolation(
            f"grid optimum {value!r} beats the predicate closed form")
    if achieved < value - slack:
        raise err.InvariantViolation(
            f"W'_o privacy {achieved!r} below the grid optimum")
    return w, value


class SimResult:

    def __init__(
        self,
        trials: int,
        errors: int,
        seed: int,
        workers: int,
        n: int,
    ) -> None:
        self.trials = trials
        self.errors = errors
        self.empirical_error = errors / trials
        p = self.empirical_error
        self.std_error = math.sqrt(p * (1.0 - p) / trials)
        self.seed = seed
        self.workers = workers
        self.n = n
        self.algorithm = _const.RNG_ALGORITHM
        self.numpy_version = np.__version__

    def __repr__(self) -> str:
        return (f"<SimResult error={self.empirical_error:.6g}"
                f" +/- {self.std_error:.2g} trials={self.trials}>")

    __str__ = __repr__

    def within(self, exact: float, sigmas: float = 4.0) -> bool:
        ok = abs(self.empirical_error - exact) <= sigmas * self.std_error
        if not ok:
            logger.warning(
                "simulated error %.6g deviates from %.6g by more than "
                "%g sigma (seed %d)", self.empirical_error, exact, sigmas,
                self.seed)
        return ok

    def todict(self) -> dict:
        return {
            'trials': self.trials,
            'errors': self.errors,
            'empirical_error': self.empirical_error,
            'std_error': self.std_error,
            'seed': self.seed,
            'workers': self.workers,
            'n': self.n,
            'rng': self.algorithm,
            'numpy': self.numpy_version,
        }


def _sample_rows(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw: the first index whose cumulative mass
    exceeds u."""
    draws = (u[:, None] >= cdf).sum(axis=1)
    return np.minimum(draws, cdf.shape[1] - 1)


def _simulate_chunk(
    px: np.ndarray,
    mats: Sequence[np.ndarray],
    trials: int,
    seed_seq: np.random.SeedSequence,
    batch: int = 1 << 16,
) -> int:
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    px_cdf = np.cumsum(px)
    cdfs = [np.cumsum(m, axis=1) for m in mats]
    with np.errstate(divide='ignore'):
        log_px = np.log(px)
        logs = [np.log(m) for m in mats]
    errors, done = 0, 0
    while done < trials:
        size = min(batch, trials - done)
        x = np.minimum(
            np.searchsorted(px_cdf, rng.random(size), side='right'),
            px.size - 1)
        loglik = np.repeat(log_px[None, :], size, axis=0)
        for cdf, logm in zip(cdfs, logs):
            z = _sample_rows(cdf[x], rng.random(size))
            loglik = loglik + logm[:, z].T
        errors += int(np.count_nonzero(np.argmax(loglik, axis=1) != x))
        done += size
    return errors


def simulate_protocol(
    model: DataModel,
    mechanisms: Any,
    n: Optional[int] = None,
    trials: int = 100_000,
    seed: int = 0,
    workers: Optional[int] = None,
) -> SimResult:
    """ Draw X, then n conditionally independent responses, and count
    MAP mistakes. A single mechanism with ``n`` is repeated n times.
    Results are reproducible for a fixed seed and worker count.
    """
    if trials < 1:
        raise err.InvalidValueError("trials must be at least 1")
    if isinstance(mechanisms, (Mechanism, AddNoiseMechanism)):
        mechanisms = [mechanisms] * (n or 1)
    mats = [as_row_lifted(m, model.f).matrix for m in mechanisms]
    if n is not None and n != len(mats):
        raise err.InvalidValueError(f"{len(mats)} mechanisms for n={n}")
    workers = g.workers(workers)
    children = np.random.SeedSequence(seed).spawn(workers)
    shares = [trials // workers + (1 if w < trials % workers else 0)
              for w in range(workers)]
    jobs = [(share, child) for share, child in zip(shares, children) if share]
    logger.debug("simulation: %d trials, n=%d, %d workers",
                 trials, len(mats), workers)

    if len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_simulate_chunk, model.px, mats, s, c)
                       for s, c in jobs]
            counts = [f.result() for f in futures]
    else:
        counts = [_simulate_chunk(model.px, mats, s, c) for s, c in jobs]
    return SimResult(trials, sum(counts), seed, workers, len(mats))


def rational_crosscheck(
    px: Sequence[Any], w: Sequence[Sequence[Any]]
) -> Fraction:
    """Exact 1 - sum_i max_x P_X(x) W(i|x) in rationals."""
    px = [Fraction(p) for p in px]
    rows = [[Fraction(e) for e in row] for row in w]
    if sum(px) != 1:
        raise err.NotNormalized(tol=0)
    if len(rows) != len(px) or any(sum(row) != 1 for row in rows):
        raise err.NotRowStochastic
    k = len(rows[0])
    success = sum(max(px[x] * rows[x][i] for x in range(len(px)))
                  for i in range(k))
    return 1 - success


def rational_build_Wo(
    px: Sequence[Any], f: Sequence[int], rho: Any
) -> List[List[Fraction]]:
    px = [Fraction(p) for p in px]
    rho = Fraction(rho)
    k = max(f) + 1
    masses = []
    for i in range(k):
        masses.append(max(p for p, fi in zip(px, f) if fi == i))
    rho_c = max(px) / sum(masses)
    level = max(rho_c, rho)
    rows = []
    for fx in f:
        others = sum(masses) - masses[fx]
        row = [(1 - level) * masses[i] / others for i in range(k)]
        row[fx] = level
        rows.append(row)
    return rows


def rational_build_V1(k: int, rho: Any) -> List[List[Fraction]]:
    rho = Fraction(rho)
    rows = [[Fraction(0)] * k for _ in range(k)]
    for j in range(0, k - 1, 2):
        rows[j][j] = rows[j + 1][j + 1] = rho
        rows[j][j + 1] = rows[j + 1][j] = 1 - rho
    if k % 2:
        rows[k - 1][k - 1] = rho
        rows[k - 1][0] = 1 - rho
    return rows


def random_feasible_mechanism(
    model: DataModel, rho: float, rng: np.random.Generator
) -> Mechanism:
    """W(f(x)|x) uniform on [rho, 1], the rest split by a flat
    Dirichlet draw."""
    r, k = model.r, model.k
    matrix = np.empty((r, k))
    for x in range(r):
        i = int(model.f[x])
        keep = rho + (1.0 - rho) * rng.random()
        rest = rng.dirichlet(np.ones(k - 1)) * (1.0 - keep)
        matrix[x] = np.insert(rest, i, keep)
    return Mechanism(matrix, rho=rho)
