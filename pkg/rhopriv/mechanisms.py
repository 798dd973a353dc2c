"""
    rhopriv.mechanisms
    ~~~~~~~~~~~~~~~~~~

    Query-response channels. A row-lifted mechanism W maps data symbols
    to responses; an add-noise mechanism V maps function values to
    responses and is lifted to W by copying row f(x) to every x.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Any, Optional, Sequence, Tuple

import numpy as np

from . import _const, _helper, _logging, err
from .model import DataModel, SupportStats, support_stats

__all__ = (
    'Mechanism',
    'AddNoiseMechanism',
    'is_rho_recoverable',
    'build_Wo',
    'build_Vo',
    'build_Wo_predicate',
    'build_Wo_doubleprime',
    'build_V1',
    'build_V2',
    'build_V1_for',
    'build_V2_for',
    'build_scheme',
    'lift_to_W',
    'collapse_to_V',
    'canonical_relabel',
)

logger = _logging.create_logger()


def _stochastic(matrix: Any, what: str) -> np.ndarray:
    matrix = np.array(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 2:
        raise err.NotRowStochastic(f"{what} must be a 2-d matrix")
    if not np.all(np.isfinite(matrix)) or np.any(matrix < 0):
        raise err.NotRowStochastic(f"{what} has a negative entry")
    sums = matrix.sum(axis=1)
    worst = int(np.argmax(np.abs(sums - 1.0)))
    if abs(sums[worst] - 1.0) > _const.TOL.ROW:
        raise err.NotRowStochastic(
            f"{what} row {worst} sums to {sums[worst]!r}")
    matrix.setflags(write=False)
    return matrix


class _Channel:

    __slots__ = ('matrix', 'scheme', 'rho')

    def __init__(
        self,
        matrix: Any,
        scheme: Optional[str] = None,
        rho: Optional[float] = None,
    ) -> None:
        self.matrix = _stochastic(matrix, self.__class__.__name__)
        self.scheme = scheme
        self.rho = rho

    def __repr__(self) -> str:
        rows, cols = self.matrix.shape
        return (f"<{self.__class__.__name__} {rows}x{cols}"
                f" scheme={self.scheme} rho={self.rho}>")

    __str__ = __repr__

    def __eq__(self, other: Any) -> bool:
        if type(other) is not type(self):
            return NotImplemented
        return np.array_equal(self.matrix, other.matrix)

    __hash__ = None  # type: ignore

    @property
    def k(self) -> int:
        return int(self.matrix.shape[1])


class Mechanism(_Channel):
    """ Row-lifted mechanism W: X -> Z, ``matrix[x, i] = W(i|x)``. """

    __slots__ = ()

    @property
    def r(self) -> int:
        return int(self.matrix.shape[0])

    def recoverability_level(self, f: Sequence[int]) -> float:
        """min over x of W(f(x)|x)."""
        f = np.asarray(f, dtype=int)
        return float(self.matrix[np.arange(self.r), f].min())


class AddNoiseMechanism(_Channel):
    """ Add-noise mechanism V: Z -> Z, ``matrix[j, i] = V(i|j)``. """

    __slots__ = ()

    def __init__(
        self,
        matrix: Any,
        scheme: Optional[str] = None,
        rho: Optional[float] = None,
    ) -> None:
        super().__init__(matrix, scheme, rho)
        if self.matrix.shape[0] != self.matrix.shape[1]:
            raise err.NotRowStochastic("add-noise matrix must be square")
        if rho is not None and \
                self.recoverability_level < rho - _const.TOL.ROW:
            raise err.InvalidValueError(
                f"diagonal {self.recoverability_level!r} below rho={rho}")

    @property
    def recoverability_level(self) -> float:
        return float(np.diag(self.matrix).min())


def is_rho_recoverable(
    mechanism: Any, f: Optional[Sequence[int]], rho: float
) -> bool:
    """W(f(x)|x) >= rho for every x (V(i|i) >= rho for add-noise)."""
    if isinstance(mechanism, AddNoiseMechanism):
        level = mechanism.recoverability_level
    else:
        level = mechanism.recoverability_level(f)
    return level >= rho - _const.TOL.ROW


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if not 0.0 <= rho <= 1.0:
        raise err.InvalidValueError(f"rho={rho!r} outside [0, 1]")
    return rho


def _stats(model: DataModel, stats: Optional[SupportStats]) -> SupportStats:
    return stats if stats is not None else support_stats(model)


def _vo_rows(masses: np.ndarray, level: float) -> np.ndarray:
    k = masses.size
    rows = np.empty((k, k))
    for j in range(k):
        others = _helper.fsum(np.delete(masses, j))
        # ratio first so that a lone off-diagonal entry is exactly 1-level
        rows[j] = (1.0 - level) * (masses / others)
        rows[j, j] = level
    return rows


def build_Vo(
    model: DataModel, stats: Optional[SupportStats], rho: float
) -> AddNoiseMechanism:
    """ V_o(i|j) = max{rho_c, rho} on the diagonal, else the remaining
    mass split in proportion to P_X(x_i*).
    """
    rho = _check_rho(rho)
    stats = _stats(model, stats)
    level = max(stats.rho_c, rho)
    return AddNoiseMechanism(
        _vo_rows(np.asarray(stats.masses), level),
        scheme=_const.SCHEME.VO, rho=rho)


def build_Wo(
    model: DataModel, stats: Optional[SupportStats], rho: float
) -> Mechanism:
    v = build_Vo(model, stats, rho)
    return Mechanism(v.matrix[model.f], scheme=_const.SCHEME.WO, rho=rho)


def build_Wo_predicate(
    model: DataModel, stats: Optional[SupportStats], rho: float
) -> Mechanism:
    """ The optimal mechanism for hiding h(X). Rows depend on x only
    through (f(x), h(x)).
    """
    if not model.has_predicate:
        raise err.NoPredicate
    rho = _check_rho(rho)
    stats = _stats(model, stats)
    r, k = model.r, model.k

    if abs(stats.rho_c_prime - 1.0) <= _const.TOL.INPUT:
        logger.debug("rho'_c = 1, predicate mechanism is deterministic")
        matrix = np.zeros((r, k))
        matrix[np.arange(r), model.f] = 1.0
        return Mechanism(matrix, scheme=_const.SCHEME.WO_PRED, rho=rho)

    level = max(stats.rho_c_prime, rho)
    joint = stats.joint_mass
    best = joint.max(axis=1)
    total = stats.sum_joint_star
    matrix = np.empty((r, k))
    for x in range(r):
        i, j = int(model.f[x]), int(model.h[x])
        denom = total - float(stats.predicate_mass[j])
        if denom <= 0:
            raise err.DegenerateDenominator(
                f"denominator {denom!r} for predicate value {j} "
                f"although rho'_c={stats.rho_c_prime!r} < 1")
        matrix[x] = (1.0 - level) * ((best - joint[:, j]) / denom)
        matrix[x, i] += level
    return Mechanism(matrix, scheme=_const.SCHEME.WO_PRED, rho=rho)


def build_Wo_doubleprime(
    model: DataModel, stats: Optional[SupportStats], rho: float
) -> Mechanism:
    """ W'_o for the identity predicate, written out directly:
    row x keeps max{rho_c, rho} plus a share of P(x_f(x)*) - P(x) on
    f(x) and spreads the rest in proportion to P(x_i*). Unlike W_o it
    depends on every mass P(x), not only on f(x).
    """
    rho = _check_rho(rho)
    stats = _stats(model, stats)
    level = max(stats.rho_c, rho)
    masses = np.asarray(stats.masses)
    total = stats.sum_xi_star
    matrix = np.empty((model.r, model.k))
    for x in range(model.r):
        i, p = int(model.f[x]), float(model.px[x])
        denom = total - p
        if denom <= 0:
            raise err.DegenerateDenominator(
                f"denominator {denom!r} for data symbol {x}")
        row = (1.0 - level) * (masses / denom)
        row[i] = level + (1.0 - level) * ((masses[i] - p) / denom)
        matrix[x] = row
    if np.any(matrix < -_const.TOL.ROW):
        x, i = np.unravel_index(int(np.argmin(matrix)), matrix.shape)
        raise err.NegativeEntry(
            f"W''_o({i}|{x}) = {matrix[x, i]!r} at rho={rho}")
    return Mechanism(np.clip(matrix, 0.0, None),
                     scheme=_const.SCHEME.WO_DBLPRIME, rho=rho)


def build_V1(k: int, rho: float) -> AddNoiseMechanism:
    """ Block-diagonal 2x2 randomized response; for odd k the last label
    keeps rho and sends 1-rho to label 0.
    """
    rho = _check_rho(rho)
    if k < 2:
        raise err.AlphabetTooSmall
    matrix = np.zeros((k, k))
    for j in range(0, k - 1, 2):
        matrix[j, j] = matrix[j + 1, j + 1] = rho
        matrix[j, j + 1] = matrix[j + 1, j] = 1.0 - rho
    if k % 2:
        matrix[k - 1, k - 1] = rho
        matrix[k - 1, 0] = 1.0 - rho
    return AddNoiseMechanism(matrix, scheme=_const.SCHEME.V1, rho=rho)


def v2_block_size(rho: float) -> int:
    """Largest block whose diagonal 1/size passes the recoverability
    check at rho, so 0.3333333333 still gives blocks of 3."""
    return int(1 / (Fraction(rho) - Fraction(_const.TOL.ROW)))


def build_V2(k: int, rho: float) -> AddNoiseMechanism:
    """ Uniform blocks of size floor(1/rho) and one filler block holding
    the remaining k mod floor(1/rho) labels.
    """
    rho = _check_rho(rho)
    if k < 2:
        raise err.AlphabetTooSmall
    if rho > 0.5:
        raise err.RhoOutOfRealm(rho=rho, realm='[0, 0.5]')
    if rho <= 1.0 / k:
        return AddNoiseMechanism(np.full((k, k), 1.0 / k),
                                 scheme=_const.SCHEME.V2, rho=rho)
    size = v2_block_size(rho)
    matrix = np.zeros((k, k))
    start = 0
    while start < k:
        stop = min(start + size, k)
        matrix[start:stop, start:stop] = 1.0 / (stop - start)
        start = stop
    return AddNoiseMechanism(matrix, scheme=_const.SCHEME.V2, rho=rho)


def canonical_relabel(model: DataModel) -> Tuple[DataModel, np.ndarray]:
    """ Relabel Z so that P_X(x_i*) is nonincreasing in i (stable).
    New label t stands for old label ``perm[t]``.
    """
    stats = support_stats(model)
    perm = _helper.stable_desc_order(stats.masses)
    return model.relabel(perm), perm


def _unpermute(v: AddNoiseMechanism, perm: np.ndarray) -> AddNoiseMechanism:
    inv = _helper.inverse_permutation(perm)
    return AddNoiseMechanism(v.matrix[np.ix_(inv, inv)],
                             scheme=v.scheme, rho=v.rho)


def build_V1_for(model: DataModel, rho: float) -> AddNoiseMechanism:
    """V_1 built on the sorted labeling and mapped back to model's
    labels."""
    _, perm = canonical_relabel(model)
    return _unpermute(build_V1(model.k, rho), perm)


def build_V2_for(model: DataModel, rho: float) -> AddNoiseMechanism:
    _, perm = canonical_relabel(model)
    return _unpermute(build_V2(model.k, rho), perm)


def lift_to_W(v: AddNoiseMechanism, f: Sequence[int]) -> Mechanism:
    f = np.asarray(f, dtype=int)
    return Mechanism(v.matrix[f], scheme=v.scheme, rho=v.rho)


def collapse_to_V(w: Mechanism, f: Sequence[int]) -> AddNoiseMechanism:
    """Inverse of lift_to_W, defined when W is constant on every cell."""
    f = np.asarray(f, dtype=int)
    k = w.k
    rows = np.empty((k, k))
    for j in range(k):
        cell = w.matrix[f == j]
        if cell.shape[0] == 0:
            raise err.NotSurjective(f"label {j} has no preimage")
        if np.max(np.abs(cell - cell[0])) > _const.TOL.ROW:
            raise err.NotRowConstant(
                f"mechanism rows differ inside f^-1({j})")
        rows[j] = cell[0]
    return AddNoiseMechanism(rows, scheme=w.scheme)


def build_scheme(
    model: DataModel,
    rho: float,
    scheme: str,
    stats: Optional[SupportStats] = None,
) -> Any:
    """Construct one of the catalog mechanisms by name."""
    stats = _stats(model, stats)
    if scheme == _const.SCHEME.WO:
        return build_Wo(model, stats, rho)
    if scheme == _const.SCHEME.VO:
        return build_Vo(model, stats, rho)
    if scheme == _const.SCHEME.WO_PRED:
        return build_Wo_predicate(model, stats, rho)
    if scheme == _const.SCHEME.WO_DBLPRIME:
        return build_Wo_doubleprime(model, stats, rho)
    if scheme == _const.SCHEME.V1:
        return build_V1_for(model, rho)
    if scheme == _const.SCHEME.V2:
        return build_V2_for(model, rho)
    raise err.InvalidValueError(
        f"unknown scheme {scheme!r}, expected one of {_const.SCHEMES}")


def as_row_lifted(mechanism: Any, f: Sequence[int]) -> Mechanism:
    if isinstance(mechanism, AddNoiseMechanism):
        return lift_to_W(mechanism, f)
    return mechanism
