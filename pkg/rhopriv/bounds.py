"""
    rhopriv.bounds
    ~~~~~~~~~~~~~~

    Closed forms and bounds for the best achievable privacy. Logarithms
    and exponentials in user-visible quantities are base 2.
"""
from __future__ import annotations

import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import special, stats as sps

from . import _const, _helper, _logging, err, util
from .mechanisms import v2_block_size
from .model import DataModel, SupportStats, support_stats

__all__ = (
    'BoundsReport',
    'rho_privacy_closed',
    'rho_privacy_minentropy_form',
    'predicate_privacy_closed',
    'minentropy_decomposition',
    'binom_tail_le_half',
    'binom_tail_gt_half',
    'bernoulli_kl',
    'binom_tail_type_bounds',
    'gamma_n',
    'lambda_n',
    'converse_upper',
    'achievability_lower_V1',
    'closed_V2',
    'prop2_bounds',
    'asymptotic_summary',
    'prior_family_guarantee',
    'privacy_curve',
    'uniform_v1_identity',
    'bounds_report',
)

logger = _logging.create_logger()

INF = math.inf


def _stats(model: DataModel, stats: Optional[SupportStats]) -> SupportStats:
    return stats if stats is not None else support_stats(model)


def _sorted_masses(stats: SupportStats) -> np.ndarray:
    return np.sort(np.asarray(stats.masses))[::-1]


def rho_privacy_closed(
    model: DataModel, stats: Optional[SupportStats], rho: float
) -> float:
    """1 - max{rho_c, rho} * sum_i P_X(x_i*)."""
    stats = _stats(model, stats)
    return 1.0 - max(stats.rho_c, rho) * stats.sum_xi_star


def rho_privacy_minentropy_form(
    model: DataModel, stats: Optional[SupportStats], rho: float
) -> float:
    stats = _stats(model, stats)
    return 1.0 - max(stats.p_star, rho * stats.sum_xi_star)


def predicate_privacy_closed(
    model: DataModel, stats: Optional[SupportStats], rho: float
) -> float:
    if not model.has_predicate:
        raise err.NoPredicate
    stats = _stats(model, stats)
    return 1.0 - max(stats.rho_c_prime, rho) * stats.sum_joint_star


@util.adictformatter
def minentropy_decomposition(
    model: DataModel, stats: Optional[SupportStats] = None
) -> List[dict]:
    """ Per cell i: its mass P_X(f^-1(i)) and the min-entropy of the
    conditional pmf inside it, checked against P_X(x_i*).
    """
    stats = _stats(model, stats)
    table = []
    for i in range(model.k):
        mass = _helper.fsum(model.px[model.cell(i)])
        top = float(stats.masses[i])
        hmin = -math.log2(top / mass)
        rebuilt = mass * 2.0 ** (-hmin)
        if abs(rebuilt - top) > _const.TOL.INPUT:
            raise err.InvariantViolation(
                f"cell {i}: mass * 2^-Hmin = {rebuilt!r}, P(x_i*) = {top!r}")
        table.append({'cell': i, 'mass': mass, 'hmin_bits': hmin,
                      'top_mass': top})
    return table


def binom_tail_le_half(n: int, rho: float) -> float:
    """P(Bin(n, rho) <= floor(n/2))."""
    if n < 1:
        raise err.InvalidValueError(f"n must be at least 1, got {n}")
    if rho <= 0.0:
        return 1.0
    if rho >= 1.0:
        return 0.0
    half = n // 2
    # the smaller of the two tails is computed directly
    if rho > 0.5:
        return float(sps.binom.cdf(half, n, rho))
    return 1.0 - float(sps.binom.sf(half, n, rho))


def binom_tail_gt_half(n: int, rho: float) -> float:
    """P(Bin(n, rho) >= floor(n/2) + 1)."""
    if n < 1:
        raise err.InvalidValueError(f"n must be at least 1, got {n}")
    if rho <= 0.0:
        return 0.0
    if rho >= 1.0:
        return 1.0
    half = n // 2
    if rho > 0.5:
        return 1.0 - float(sps.binom.cdf(half, n, rho))
    return float(sps.binom.sf(half, n, rho))


def bernoulli_kl(a: float, b: float) -> float:
    """D(Ber(a) || Ber(b)) in bits, 0 log 0 = 0 and +inf on a zero
    denominator."""
    for value in (a, b):
        if not 0.0 <= value <= 1.0:
            raise err.InvalidValueError(f"{value!r} is not a probability")
    with np.errstate(divide='ignore'):
        nats = (special.xlogy(a, a) - special.xlogy(a, b)
                + special.xlogy(1 - a, 1 - a) - special.xlogy(1 - a, 1 - b))
    if math.isinf(nats) or math.isnan(nats):
        return INF
    return max(0.0, float(nats) / math.log(2.0))


def _type_exponent(n: int, rho: float) -> float:
    """2^(-n D(Ber(floor(n/2)/n) || Ber(rho)))."""
    divergence = bernoulli_kl((n // 2) / n, rho)
    if math.isinf(divergence):
        return 0.0
    return 2.0 ** (-n * divergence)


def binom_tail_type_bounds(n: int, rho: float) -> Tuple[float, float]:
    """ Method-of-types sandwich of P(Bin(n, rho) <= floor(n/2)) for
    0.5 <= rho <= 1, as (lower, upper).
    """
    if not 0.5 <= rho <= 1.0:
        raise err.RhoOutOfRealm(rho=rho, realm='[0.5, 1]')
    term = _type_exponent(n, rho)
    return term / (n + 1), (n // 2 + 1) * term


def gamma_n(stats: SupportStats, n: int, rho: float) -> float:
    tail = binom_tail_le_half(n, rho)
    return min(1.0 - stats.rho_c, min(1.0 - rho, tail)) * stats.sum_xi_star


def _odd_mass(stats: SupportStats) -> float:
    return _helper.fsum(_sorted_masses(stats)[1::2])


def lambda_n(stats: SupportStats, n: int, rho: float) -> float:
    """Tail probability times the x_i* masses of odd labels in the
    sorted labeling."""
    return binom_tail_le_half(n, rho) * _odd_mass(stats)


def converse_upper(stats: SupportStats, n: int, rho: float) -> float:
    """Upper bound on the best privacy from n rho-recoverable
    responses."""
    return 1.0 - stats.sum_xi_star + gamma_n(stats, n, rho)


def _check_high_realm(rho: float) -> None:
    if not 0.5 < rho <= 1.0:
        raise err.RhoOutOfRealm(rho=rho, realm='(0.5, 1]')


def achievability_lower_V1(stats: SupportStats, n: int, rho: float) -> float:
    """Lower bound on the privacy of n independent V_1 responses."""
    _check_high_realm(rho)
    return 1.0 - stats.sum_xi_star + lambda_n(stats, n, rho)


def closed_V2(stats: SupportStats, rho: float) -> float:
    """Exact privacy of V_2 responses, the same for every n."""
    if not 0.0 <= rho <= 0.5:
        raise err.RhoOutOfRealm(rho=rho, realm='[0, 0.5]')
    masses = _sorted_masses(stats)
    k = masses.size
    if rho <= 1.0 / k:
        return 1.0 - float(masses[0])
    size = v2_block_size(rho)
    # one representative per block, filler included
    return 1.0 - _helper.fsum(masses[0:k:size])


@util.adictformatter
def prop2_bounds(stats: SupportStats, n: int, rho: float) -> dict:
    """ Exponential-form bounds on the privacy of n responses; the upper
    one only holds when ``upper_valid``.
    """
    _check_high_realm(rho)
    term = _type_exponent(n, rho)
    spread = (n // 2 + 1) * term
    upper = 1.0 - stats.sum_xi_star + spread * stats.sum_xi_star
    lower = 1.0 - stats.sum_xi_star + term / (n + 1) * _odd_mass(stats)
    valid = spread <= 1.0 - min(rho, stats.rho_c)
    if not valid:
        logger.warning("exponential upper bound invalid at n=%d rho=%g",
                       n, rho)
    return {'upper': upper, 'lower': lower, 'upper_valid': valid}


@util.adictformatter
def asymptotic_summary(stats: SupportStats, rho: float) -> dict:
    """ Limit of the best privacy as n grows: pi(1) at rate
    D(Ber(0.5)||Ber(rho)) above 0.5, the V_2 value below.
    """
    pi_one = 1.0 - stats.sum_xi_star
    if rho > 0.5:
        return {
            'limit': pi_one,
            'rate_bits': bernoulli_kl(0.5, rho),
            'realm': _const.REALM.CONVERGING,
            'strict_gap': False,
        }
    limit = closed_V2(stats, rho)
    return {
        'limit': limit,
        'rate_bits': 0.0,
        'realm': _const.REALM.NON_CONVERGING,
        'strict_gap': limit > pi_one + _const.TOL.CHECK,
    }


def _family_value(
    model: DataModel, rho: float, n: int, scheme: Optional[str]
) -> float:
    stats = support_stats(model)
    if n == 1:
        return rho_privacy_closed(model, stats, rho)
    if scheme == _const.SCHEME.V2 or (scheme is None and rho <= 0.5):
        return closed_V2(stats, rho)
    return achievability_lower_V1(stats, n, rho)


def prior_family_guarantee(
    family: Sequence[DataModel],
    rho: float,
    n: int = 1,
    scheme: Optional[str] = None,
) -> Tuple[DataModel, float]:
    """ The least favourable prior P_* of a family sharing (r, f, h) and
    the privacy it guarantees for every member.
    """
    family = list(family)
    if not family:
        raise err.IncompatibleFamily("empty prior family")
    first = family[0]
    for model in family[1:]:
        same_h = (model.h is None) == (first.h is None) and (
            model.h is None or np.array_equal(model.h, first.h))
        if model.r != first.r or not np.array_equal(model.f, first.f) \
                or not same_h:
            raise err.IncompatibleFamily
    values = [_family_value(model, rho, n, scheme) for model in family]
    best = _helper.argmax(-np.asarray(values))
    return family[best], values[best]


@util.adictformatter
def privacy_curve(
    model: DataModel,
    grid: Sequence[float],
    n: int = 1,
    stats: Optional[SupportStats] = None,
) -> List[dict]:
    """ pi(rho) with the n-response converse and the matching
    achievability (V_1 bound above 0.5, V_2 value below) on a grid.
    """
    stats = _stats(model, stats)
    rows = []
    for rho in grid:
        rho = float(rho)
        achievability = (achievability_lower_V1(stats, n, rho)
                         if rho > 0.5 else closed_V2(stats, rho))
        rows.append({
            'rho': rho,
            'privacy': rho_privacy_closed(model, stats, rho),
            'converse_upper': converse_upper(stats, n, rho),
            'achievability': achievability,
        })
    logger.debug("curve: %d points, breakpoint rho_c=%.6g",
                 len(rows), stats.rho_c)
    return rows


def uniform_v1_identity(model: DataModel, rho: float) -> float:
    """ For a uniform pmf, one response and rho in (0.5, 1], V_1 reaches
    1 - k rho / r, which is also pi(rho). Below 0.5 the column maxima of
    V_1 are 1 - rho and the identity no longer holds.
    """
    _check_high_realm(rho)
    if np.ptp(model.px) > _const.TOL.INPUT:
        raise err.InvalidValueError("uniform pmf required")
    return 1.0 - model.k * rho / model.r


class BoundsReport:
    """Every bound at one (rho, n); realm-gated fields are None outside
    their realm."""

    def __init__(
        self, model: DataModel, n: int, rho: float,
        stats: Optional[SupportStats] = None,
    ) -> None:
        stats = _stats(model, stats)
        self.rho = rho
        self.n = n
        self.converse_upper = converse_upper(stats, n, rho)
        self.gamma_n = gamma_n(stats, n, rho)
        self.lambda_n = lambda_n(stats, n, rho)
        high = rho > 0.5
        self.achiev_lower_V1 = (
            achievability_lower_V1(stats, n, rho) if high else None)
        self.closed_V2 = None if high else closed_V2(stats, rho)
        if high:
            prop2 = prop2_bounds(stats, n, rho)
            self.prop2_upper = prop2.upper
            self.prop2_lower = prop2.lower
            self.prop2_upper_valid = prop2.upper_valid
        else:
            self.prop2_upper = self.prop2_lower = None
            self.prop2_upper_valid = None
        self.limit_value = 1.0 - stats.sum_xi_star
        self.rate_bits = bernoulli_kl(0.5, rho)
        if self.achiev_lower_V1 is not None and \
                self.achiev_lower_V1 > self.converse_upper + _const.TOL.CHECK:
            raise err.InvariantViolation(
                "V_1 achievability exceeds the converse")

    def todict(self) -> dict:
        return {
            'rho': self.rho,
            'n': self.n,
            'converse_upper': self.converse_upper,
            'achiev_lower_V1': self.achiev_lower_V1,
            'closed_V2': self.closed_V2,
            'gamma_n': self.gamma_n,
            'lambda_n': self.lambda_n,
            'prop2_upper': self.prop2_upper,
            'prop2_lower': self.prop2_lower,
            'prop2_upper_valid': self.prop2_upper_valid,
            'limit_value': self.limit_value,
            'rate_bits': self.rate_bits,
        }


def bounds_report(
    model: DataModel, n: int, rho: float,
    stats: Optional[SupportStats] = None,
) -> BoundsReport:
    return BoundsReport(model, n, rho, stats)
