"""
    rhopriv.privacy
    ~~~~~~~~~~~~~~~

    Exact MAP estimation error of the data (or of a predicate of it)
    from one or several conditionally independent responses.

    Every quantity here is a "success mass"
        sum over response tuples of max over hypotheses of
        prior(hyp) * prod_t M_t(i_t | hyp),
    optionally summing hypotheses that share a group before the max.
    Two exact evaluation paths exist: naive enumeration of the k**n
    tuples and, when all responses share a channel, iteration over the
    response types (count vectors) with multinomial weights.
"""
from __future__ import annotations

import functools
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import special

from . import _const, _helper, _logging, err, g
from .mechanisms import AddNoiseMechanism, Mechanism, as_row_lifted
from .model import DataModel, SupportStats, support_stats

__all__ = (
    'PrivacyReport',
    'map_estimate',
    'map_estimate_multi',
    'pointwise_error_masses',
    'privacy_single',
    'privacy_multi',
    'privacy_multi_addnoise',
    'predicate_privacy',
    'function_recovery_probability',
)

logger = _logging.create_logger()

# elements of the vectorized inner tensor per enumeration step
_INNER_BLOCK = 1 << 18


class PrivacyReport:
    """ Result of an exact privacy computation.

    ``decision_rule`` maps a response tuple (a single response for n=1)
    to the MAP estimate; it is evaluated lazily.
    """

    def __init__(
        self,
        value: float,
        method: str,
        n: int,
        decision_rule: Callable[[Any], int],
        error_masses: Optional[np.ndarray] = None,
        path: Optional[str] = None,
    ) -> None:
        self.value = _helper.check_probability(
            value, _const.TOL.CHECK, 'privacy')
        self.success = 1.0 - self.value
        self.method = method
        self.n = n
        self.decision_rule = decision_rule
        self.error_masses = error_masses
        # enumeration path underneath a reduced evaluation
        self.path = path

    def __repr__(self) -> str:
        return (f"<PrivacyReport value={self.value:.12g} n={self.n}"
                f" method={self.method}>")

    __str__ = __repr__

    @property
    def pointwise_value(self) -> Optional[float]:
        """max over responses i of P(g(Z) != X, Z = i)."""
        if self.error_masses is None:
            return None
        return float(np.max(self.error_masses))

    def todict(self) -> dict:
        data = {
            'value': self.value,
            'success': self.success,
            'method': self.method,
            'n': self.n,
        }
        if self.path is not None:
            data['path'] = self.path
        if self.error_masses is not None:
            data['error_masses'] = [float(e) for e in self.error_masses]
            data['pointwise_value'] = self.pointwise_value
        return data


def _as_list(mechanisms: Any) -> List[Any]:
    if isinstance(mechanisms, (Mechanism, AddNoiseMechanism)):
        return [mechanisms]
    mechanisms = list(mechanisms)
    if not mechanisms:
        raise err.InvalidValueError("at least one mechanism is required")
    return mechanisms


def _row_lifted(model: DataModel, mechanisms: Any) -> List[np.ndarray]:
    mats = []
    for mech in _as_list(mechanisms):
        w = as_row_lifted(mech, model.f)
        if w.matrix.shape != (model.r, model.k):
            raise err.InvalidValueError(
                f"mechanism shape {w.matrix.shape} does not fit "
                f"r={model.r}, k={model.k}")
        mats.append(w.matrix)
    return mats


def _all_equal(mats: Sequence[np.ndarray]) -> bool:
    return all(np.array_equal(mats[0], m) for m in mats[1:])


def _onehot(groups: Optional[np.ndarray], size: int) -> Optional[np.ndarray]:
    if groups is None:
        return None
    hot = np.zeros((groups.size, size))
    hot[np.arange(groups.size), groups] = 1.0
    return hot


def _partitions(total: int, parts: int) -> List[Tuple[int, int]]:
    parts = max(1, min(parts, total))
    edges = np.linspace(0, total, parts + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _naive_partition(
    prior: np.ndarray,
    mats: Sequence[np.ndarray],
    onehot: Optional[np.ndarray],
    outer: int,
    span: Tuple[int, int],
) -> float:
    k = mats[0].shape[1]
    partial = []
    for index in range(*span):
        base = prior.copy()
        for t in range(outer - 1, -1, -1):
            index, digit = divmod(index, k)
            base = base * mats[t][:, digit]
        tensor = base[:, None]
        for mat in mats[outer:]:
            tensor = (tensor[:, :, None] * mat[:, None, :]).reshape(
                prior.size, -1)
        if onehot is not None:
            tensor = onehot.T @ tensor
        partial.append(_helper.fsum(tensor.max(axis=0)))
    return _helper.fsum(partial)


def _type_partition(
    log_prior: np.ndarray,
    mat: np.ndarray,
    groups: Optional[np.ndarray],
    n_groups: int,
    n: int,
    firsts: Sequence[int],
) -> float:
    k = mat.shape[1]
    partial = []
    for first in firsts:
        batches = (
            np.hstack([np.full((b.shape[0], 1), float(first)), b])
            for b in _helper.composition_batches(n - first, k - 1))
        for counts in batches:
            # 0 * log 0 = 0 for responses a hypothesis never emits
            loglik = log_prior[None, :] + special.xlogy(
                counts[:, None, :], mat[None, :, :]).sum(axis=2)
            if groups is not None:
                loglik = np.stack(
                    [special.logsumexp(loglik[:, groups == c], axis=1)
                     for c in range(n_groups)], axis=1)
            best = loglik.max(axis=1) + _helper.log_multinomial(counts)
            partial.append(_helper.fsum(np.exp(best)))
    return _helper.fsum(partial)


def _run(func: Callable, jobs: Sequence[Any], workers: int) -> List[float]:
    if workers <= 1 or len(jobs) <= 1:
        return [func(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map keeps submission order, the reduction is order-deterministic
        return list(pool.map(func, jobs))


def success_mass(
    prior: Sequence[float],
    mats: Sequence[np.ndarray],
    groups: Optional[Sequence[int]] = None,
    method: str = 'auto',
    workers: Optional[int] = None,
    cap: Optional[int] = None,
) -> Tuple[float, str]:
    """ sum over response tuples of max over groups of the summed
    prior * likelihood. Returns the mass and the path used.
    """
    prior = np.asarray(prior, dtype=float)
    mats = [np.asarray(m, dtype=float) for m in mats]
    n, k = len(mats), mats[0].shape[1]
    workers = g.workers(workers)
    cap = g.enumeration_cap() if cap is None else cap
    group_arr = None if groups is None else np.asarray(groups, dtype=int)
    n_groups = 0 if group_arr is None else int(group_arr.max()) + 1

    if method == 'auto':
        method = (_const.METHOD.TYPE_CLASS
                  if n > 1 and _all_equal(mats) else _const.METHOD.NAIVE)

    if method == _const.METHOD.TYPE_CLASS:
        if not _all_equal(mats):
            raise err.ProgrammingError(
                "type-class path needs identical mechanisms")
        logger.debug("type-class path: n=%d k=%d, %d types, %d workers",
                     n, k, _helper.composition_count(n, k), workers)
        with np.errstate(divide='ignore'):
            log_prior = np.log(prior)
        firsts = list(range(n + 1))
        jobs = [firsts[a:b] for a, b in _partitions(len(firsts), workers)]
        func = functools.partial(_type_partition, log_prior, mats[0],
                                 group_arr, n_groups, n)
        return _helper.fsum(_run(func, jobs, workers)), method

    if method != _const.METHOD.NAIVE:
        raise err.ProgrammingError(f"unknown evaluation path {method!r}")

    total = k ** n
    if total > cap:
        raise err.EnumerationTooLarge(size=total, cap=cap)
    inner = 1
    while inner < n and prior.size * k ** (inner + 1) <= _INNER_BLOCK:
        inner += 1
    outer = n - inner
    logger.debug("naive path: %d outcomes, %d outer prefixes, %d workers",
                 total, k ** outer, workers)
    func = functools.partial(_naive_partition, prior, mats,
                             _onehot(group_arr, n_groups), outer)
    jobs = _partitions(k ** outer, workers)
    return _helper.fsum(_run(func, jobs, workers)), method


def map_estimate(model: DataModel, w: Any, response: int) -> int:
    """argmax_x P_X(x) W(response|x), lowest x on ties."""
    mat = as_row_lifted(w, model.f).matrix
    return _helper.argmax(model.px * mat[:, int(response)])


def map_estimate_multi(
    model: DataModel, ws: Any, responses: Sequence[int]
) -> int:
    mats = _row_lifted(model, ws)
    responses = list(np.atleast_1d(responses))
    if len(responses) != len(mats):
        raise err.InvalidValueError(
            f"{len(responses)} responses for {len(mats)} mechanisms")
    post = model.px.copy()
    for mat, i in zip(mats, responses):
        post = post * mat[:, int(i)]
    return _helper.argmax(post)


def pointwise_error_masses(model: DataModel, w: Any) -> np.ndarray:
    """P(g_MAP(Z) != X, Z = i) for every response i."""
    joint = model.px[:, None] * as_row_lifted(w, model.f).matrix
    return joint.sum(axis=0) - joint.max(axis=0)


def privacy_single(model: DataModel, w: Any) -> PrivacyReport:
    mat = _row_lifted(model, w)[0]
    joint = model.px[:, None] * mat
    success = _helper.fsum(joint.max(axis=0))
    return PrivacyReport(
        1.0 - success,
        _const.METHOD.NAIVE,
        1,
        functools.partial(map_estimate, model, w),
        error_masses=joint.sum(axis=0) - joint.max(axis=0),
    )


def privacy_multi(
    model: DataModel,
    ws: Any,
    method: str = 'auto',
    workers: Optional[int] = None,
) -> PrivacyReport:
    """MAP error of X from n conditionally independent responses."""
    mats = _row_lifted(model, ws)
    if len(mats) == 1 and method in ('auto', _const.METHOD.NAIVE):
        return privacy_single(model, _as_list(ws)[0])
    mass, used = success_mass(model.px, mats, method=method,
                              workers=workers)
    return PrivacyReport(
        1.0 - mass, used, len(mats),
        functools.partial(map_estimate_multi, model, list(_as_list(ws))))


def _reduced_map(
    masses: np.ndarray, vs: Sequence[np.ndarray], responses: Sequence[int]
) -> int:
    post = masses.copy()
    for mat, i in zip(vs, np.atleast_1d(responses)):
        post = post * mat[:, int(i)]
    return _helper.argmax(post)


def privacy_multi_addnoise(
    model: DataModel,
    vs: Any,
    stats: Optional[SupportStats] = None,
    method: str = 'auto',
    workers: Optional[int] = None,
) -> PrivacyReport:
    """ MAP error of X from n add-noise responses, computed on Z alone:
    the hypotheses are the cells, weighted by P_X(x_j*). The decision
    rule returns the estimated x, namely x_j* of the winning cell.
    """
    stats = stats if stats is not None else support_stats(model)
    vlist = _as_list(vs)
    for v in vlist:
        if not isinstance(v, AddNoiseMechanism):
            raise err.InvalidValueError("expected add-noise mechanisms")
        if v.k != model.k:
            raise err.InvalidValueError(
                f"add-noise mechanism has k={v.k}, model has k={model.k}")
    mats = [v.matrix for v in vlist]
    masses = np.asarray(stats.masses)
    mass, path = success_mass(masses, mats, method=method, workers=workers)
    x_i_star = stats.x_i_star

    def rule(responses: Any) -> int:
        return int(x_i_star[_reduced_map(masses, mats, responses)])

    report = PrivacyReport(1.0 - mass, _const.METHOD.REDUCED, len(mats), rule,
                           path=path)
    # probability that the MAP rule recovers the normalized cell label
    report.reduced_success = mass / stats.sum_xi_star
    return report


def predicate_privacy(model: DataModel, w: Any) -> PrivacyReport:
    """MAP error of h(X) from a single response."""
    if not model.has_predicate:
        raise err.NoPredicate
    mat = _row_lifted(model, w)[0]
    joint = model.px[:, None] * mat
    by_value = _onehot(model.h, model.m).T @ joint
    success = _helper.fsum(by_value.max(axis=0))

    def rule(response: int) -> int:
        return _helper.argmax(by_value[:, int(response)])

    return PrivacyReport(
        1.0 - success, _const.METHOD.NAIVE, 1, rule,
        error_masses=by_value.sum(axis=0) - by_value.max(axis=0))


def function_recovery_probability(
    model: DataModel,
    ws: Any,
    method: str = 'auto',
    workers: Optional[int] = None,
) -> float:
    """Success probability of the MAP estimator of f(X) from n
    responses."""
    mats = _row_lifted(model, ws)
    mass, _ = success_mass(model.px, mats, groups=model.f, method=method,
                           workers=workers)
    return _helper.check_probability(mass, _const.TOL.CHECK, 'recovery')


def monotone_sequence(
    model: DataModel, ws: Any, workers: Optional[int] = None
) -> List[float]:
    """Privacy after the first 1, 2, ..., n responses."""
    wlist = _as_list(ws)
    return [privacy_multi(model, wlist[:t], workers=workers).value
            for t in range(1, len(wlist) + 1)]
