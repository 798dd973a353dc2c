"""
    rhopriv.chernoff
    ~~~~~~~~~~~~~~~~

    Chernoff information between mechanism rows, the Chernoff radius
    that sets the decay rate of the excess privacy of repeated
    responses, and the reduction that merges identical rows first.
"""
from __future__ import annotations

import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, special

from . import _const, _helper, _logging, err, util
from .bounds import (
    achievability_lower_V1,
    bernoulli_kl,
    closed_V2,
    converse_upper,
)
from .mechanisms import AddNoiseMechanism, build_V1_for, build_V2_for, build_Vo
from .model import DataModel, SupportStats, support_stats
from .privacy import privacy_multi_addnoise

__all__ = (
    'ChernoffReport',
    'renyi_divergence',
    'chernoff_pair',
    'chernoff_radius',
    'chernoff_report',
    'reduce_identical_rows',
    'asymptotic_privacy',
    'compare_schemes',
    'fit_exponent',
    'identical_row_check',
    'limit_vo_low_realm',
)

logger = _logging.create_logger()

INF = math.inf
LN2 = math.log(2.0)


def _pmf(values: Sequence[float]) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or np.any(arr < 0) or \
            abs(_helper.fsum(arr) - 1.0) > _const.TOL.CHECK:
        raise err.InvalidValueError("expected a pmf")
    return arr


def renyi_divergence(
    p: Sequence[float], q: Sequence[float], lam: float
) -> float:
    """ D_lambda(p||q) in bits for an order in (0, 1); +inf iff the
    supports are disjoint.
    """
    if not 0.0 < lam < 1.0:
        raise err.LambdaOutOfRange
    p, q = _pmf(p), _pmf(q)
    if p.shape != q.shape:
        raise err.InvalidValueError("pmfs must share an alphabet")
    mask = (p > 0) & (q > 0)
    if not mask.any():
        return INF
    log_sum = special.logsumexp(
        lam * np.log(p[mask]) + (1.0 - lam) * np.log(q[mask]))
    return max(0.0, float(log_sum) / ((lam - 1.0) * LN2))


def _pair(p: np.ndarray, q: np.ndarray) -> Tuple[float, float]:
    """ -min over [0, 1] of log2 sum p^l q^(1-l) and the minimizer.
    The endpoints are the one-sided limits, which differ from the
    values at 0 and 1 when zeros are present.
    """
    if np.max(np.abs(p - q)) <= _const.TOL.ROW:
        return 0.0, 0.5
    mask = (p > 0) & (q > 0)
    if not mask.any():
        return INF, 0.5
    lp, lq = np.log(p[mask]), np.log(q[mask])

    def g(lam: float) -> float:
        return float(special.logsumexp(lam * lp + (1.0 - lam) * lq)) / LN2

    edge = _const.LAMBDA_EDGE
    res = optimize.minimize_scalar(
        g, bounds=(edge, 1.0 - edge), method='bounded',
        options={'xatol': 1e-12})
    candidates = [
        (float(res.fun), float(res.x)),
        (math.log2(_helper.fsum(q[mask])), 0.0),
        (math.log2(_helper.fsum(p[mask])), 1.0),
    ]
    best = min(candidates, key=lambda c: c[0])
    return max(0.0, -best[0]), best[1]


def chernoff_pair(
    v: AddNoiseMechanism, j: int, jp: int
) -> Tuple[float, float]:
    """Chernoff information C(j, j') in bits and the minimizing
    order."""
    if j == jp:
        raise err.SameRowIndex
    matrix = v.matrix if isinstance(v, AddNoiseMechanism) \
        else np.asarray(v, dtype=float)
    if j > jp:
        value, lam = _pair(matrix[jp], matrix[j])
        return value, 1.0 - lam
    return _pair(matrix[j], matrix[jp])


class ChernoffReport:
    """ Pairwise Chernoff informations of a mechanism and, when support
    statistics are supplied, the identical-row reduction with the
    asymptotic limit and decay rate of the privacy of repeated responses.
    """

    def __init__(
        self,
        pairwise: Dict[Tuple[int, int], Tuple[float, float]],
    ) -> None:
        self.pairwise = pairwise
        if pairwise:
            self.argmin_pair = min(pairwise, key=lambda p: pairwise[p][0])
            self.radius = pairwise[self.argmin_pair][0]
        else:
            self.argmin_pair = None
            self.radius = INF
        self.identical_row_groups: Optional[List[Tuple[int, ...]]] = None
        self.j_S: Optional[List[int]] = None
        self.R_S: Optional[List[int]] = None
        self.reduced_radius: Optional[float] = None
        self.asymptotic_limit: Optional[float] = None

    def __repr__(self) -> str:
        return f"<ChernoffReport radius={self.radius:.9g}>"

    __str__ = __repr__

    @property
    def rate(self) -> Optional[float]:
        return self.reduced_radius

    def todict(self) -> dict:
        return {
            'radius': self.radius,
            'argmin_pair': (None if self.argmin_pair is None
                            else list(self.argmin_pair)),
            'pairwise': [
                {'pair': list(pair), 'value': value, 'lambda': lam}
                for pair, (value, lam) in self.pairwise.items()
            ],
            'identical_row_groups': (
                None if self.identical_row_groups is None
                else [list(s) for s in self.identical_row_groups]),
            'j_S': self.j_S,
            'R_S': self.R_S,
            'reduced_radius': self.reduced_radius,
            'asymptotic_limit': self.asymptotic_limit,
            'rate': self.rate,
        }


def _pairwise(matrix: np.ndarray) -> Dict[Tuple[int, int], Tuple[float, float]]:
    rows = matrix.shape[0]
    return {(j, jp): _pair(matrix[j], matrix[jp])
            for j in range(rows) for jp in range(j + 1, rows)}


def chernoff_radius(v: AddNoiseMechanism) -> ChernoffReport:
    """Minimum pairwise Chernoff information; 0 iff two rows agree."""
    return ChernoffReport(_pairwise(v.matrix))


def _row_groups(matrix: np.ndarray) -> List[List[int]]:
    groups: List[List[int]] = []
    for j in range(matrix.shape[0]):
        for group in groups:
            if np.max(np.abs(matrix[group[0]] - matrix[j])) <= _const.TOL.ROW:
                group.append(j)
                break
        else:
            groups.append([j])
    return groups


@util.adictformatter
def reduce_identical_rows(stats: SupportStats, v: AddNoiseMechanism) -> dict:
    """ Merge every maximal group S of identical rows into j_S, the
    member of largest P_X(x_j*). R_S keeps the merged representatives
    and all distinct rows.
    """
    masses = np.asarray(stats.masses)
    groups = _row_groups(v.matrix)
    representatives = []
    for group in groups:
        representatives.append(
            int(group[_helper.argmax(masses[group])]))
    identical = [tuple(s) for s in groups if len(s) > 1]
    j_S = [rep for rep, s in zip(representatives, groups) if len(s) > 1]
    R_S = sorted(representatives)
    return {
        'groups': identical,
        'j_S': j_S,
        'R_S': R_S,
        'matrix': v.matrix[R_S],
    }


def asymptotic_privacy(
    stats: SupportStats, v: AddNoiseMechanism
) -> Tuple[float, float]:
    """ (limit, rate): the privacy of n responses tends to
    1 - sum over R_S of P_X(x_i*) with exponent C(V restricted to R_S).
    A single remaining row means the value never moves with n.
    """
    red = reduce_identical_rows(stats, v)
    limit = 1.0 - _helper.fsum(np.asarray(stats.masses)[red.R_S])
    if len(red.R_S) < 2:
        return limit, INF
    return limit, ChernoffReport(_pairwise(red.matrix)).radius


def chernoff_report(
    stats: SupportStats, v: AddNoiseMechanism
) -> ChernoffReport:
    report = chernoff_radius(v)
    red = reduce_identical_rows(stats, v)
    report.identical_row_groups = red.groups
    report.j_S = red.j_S
    report.R_S = red.R_S
    report.asymptotic_limit, report.reduced_radius = \
        asymptotic_privacy(stats, v)
    return report


def limit_vo_low_realm(
    model: DataModel, stats: Optional[SupportStats], rho: float
) -> float:
    """Limit of the privacy of repeated V_o responses."""
    stats = stats if stats is not None else support_stats(model)
    return asymptotic_privacy(stats, build_Vo(model, stats, rho))[0]


@util.adictformatter
def identical_row_check(
    model: DataModel, stats: Optional[SupportStats], rho: float
) -> dict:
    """ Above rho_c the rows of V_o are all distinct; otherwise rows
    equal to another one all equal row i*, and there are at most
    floor(1/rho_c) of them.
    """
    stats = stats if stats is not None else support_stats(model)
    red = reduce_identical_rows(stats, build_Vo(model, stats, rho))
    cap = int(math.floor(1.0 / stats.rho_c + 1e-9))
    if rho > stats.rho_c:
        passed = not red.groups
    else:
        passed = all(stats.i_star in s and len(s) <= cap
                     for s in red.groups)
    return {'passed': passed, 'groups': red.groups, 'cap': cap}


def fit_exponent(
    ns: Sequence[int],
    values: Sequence[float],
    limit: float,
    prefactor: bool = True,
) -> float:
    """ Slope of -log2(value - limit) against n. With ``prefactor`` a
    log2(n) column absorbs polynomial factors in front of the
    exponential.
    """
    ns = np.asarray(ns, dtype=float)
    excess = np.asarray(values, dtype=float) - limit
    if np.any(excess <= 0):
        raise err.NumericalError("values must exceed the limit")
    y = -np.log2(excess)
    if not prefactor:
        return float(np.polyfit(ns, y, 1)[0])
    design = np.column_stack([ns, np.log2(ns), np.ones_like(ns)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(coef[0])


@util.adictformatter
def compare_schemes(
    model: DataModel,
    rho: float,
    stats: Optional[SupportStats] = None,
    nmax: int = 4,
    workers: Optional[int] = None,
) -> dict:
    """ Repeated V_o responses against V_1 (rho above 0.5) or V_2
    (rho up to 0.5): the asymptotic verdict with its evidence and exact
    values for n = 1..nmax.
    """
    stats = stats if stats is not None else support_stats(model)
    vo = build_Vo(model, stats, rho)
    low = rho <= 0.5
    other = build_V2_for(model, rho) if low else build_V1_for(model, rho)
    c_other = chernoff_radius(other).radius
    c_vo = chernoff_radius(vo).radius
    limit_vo, rate_vo = asymptotic_privacy(stats, vo)
    limit_other, rate_other = asymptotic_privacy(stats, other)

    if low:
        verdict = (_const.VERDICT.STRICT
                   if limit_other > limit_vo + _const.TOL.CHECK
                   else _const.VERDICT.WEAK)
    elif rho >= 1.0 or (model.k == 2 and rho >= stats.rho_c):
        if not np.array_equal(other.matrix, vo.matrix):
            raise err.InvariantViolation(
                "V_1 and V_o should coincide for k=2 and rho >= rho_c")
        verdict = _const.VERDICT.EQUALITY
    else:
        if not c_vo > c_other:
            raise err.InvariantViolation(
                f"C(V_o)={c_vo!r} does not exceed C(V_1)={c_other!r}")
        verdict = _const.VERDICT.STRICT

    table = []
    for n in range(1, nmax + 1):
        pi_vo = privacy_multi_addnoise(model, [vo] * n, stats,
                                       workers=workers).value
        pi_other = privacy_multi_addnoise(model, [other] * n, stats,
                                          workers=workers).value
        table.append({
            'n': n,
            'pi_vo': pi_vo,
            'pi_scheme': pi_other,
            'converse_upper': converse_upper(stats, n, rho),
            'achievability': (closed_V2(stats, rho) if low
                              else achievability_lower_V1(stats, n, rho)),
        })

    last = table[-1]
    if verdict == _const.VERDICT.EQUALITY:
        agrees = abs(last['pi_scheme'] - last['pi_vo']) <= _const.TOL.CHECK
    else:
        agrees = last['pi_scheme'] >= last['pi_vo'] - _const.TOL.CHECK
    if not agrees:
        logger.warning(
            "finite-n ordering at n=%d disagrees with the asymptotic "
            "verdict %s", nmax, verdict)

    return {
        'rho': rho,
        'k': model.k,
        'scheme': other.scheme,
        'verdict': verdict,
        'chernoff_scheme': c_other,
        'chernoff_vo': c_vo,
        'kl_half': bernoulli_kl(0.5, rho),
        'limit_scheme': limit_other,
        'rate_scheme': rate_other,
        'limit_vo': limit_vo,
        'rate_vo': rate_vo,
        'finite_n_agrees': agrees,
        'table': table,
    }
