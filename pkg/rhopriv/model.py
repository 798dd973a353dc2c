"""
    rhopriv.model
    ~~~~~~~~~~~~~

    Problem instances: a known pmf over a finite data alphabet, the
    function whose value is released and an optional predicate whose
    value is to be kept private.
"""
from __future__ import annotations

from typing import Any, List, Optional, Sequence

import numpy as np

from . import _const, _helper, _logging, err

__all__ = (
    'DataModel',
    'SupportStats',
    'validate',
    'support_stats',
    'lift_randomized_function',
    'lift_private_nonprivate',
)

logger = _logging.create_logger()


def _frozen(values: Any, dtype: type) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


class DataModel:
    """ A problem instance.

    :param px: pmf of the data X over {0, ..., r-1}
    :param f: labels f(x) in {0, ..., k-1}
    :param h: optional predicate labels h(x) in {0, ..., m-1}
    :param k: declared size of the function alphabet, max(f)+1 if omitted
    :param m: declared size of the predicate alphabet, max(h)+1 if omitted
    :param labels: optional names of the data symbols, an I/O concern only
    """

    __slots__ = ('px', 'f', 'h', 'k', 'm', 'labels')

    def __init__(
        self,
        px: Sequence[float],
        f: Sequence[int],
        h: Optional[Sequence[int]] = None,
        k: Optional[int] = None,
        m: Optional[int] = None,
        labels: Optional[Sequence[str]] = None,
    ) -> None:
        px = np.array(px, dtype=float).ravel()
        f = np.array(f, dtype=int).ravel()
        object.__setattr__(self, 'px', px)
        object.__setattr__(self, 'f', f)
        object.__setattr__(
            self, 'k', int(k) if k is not None else _label_count(f))
        if h is None:
            object.__setattr__(self, 'h', None)
            object.__setattr__(self, 'm', None)
        else:
            h = np.array(h, dtype=int).ravel()
            object.__setattr__(self, 'h', h)
            object.__setattr__(
                self, 'm', int(m) if m is not None else _label_count(h))
        object.__setattr__(
            self, 'labels', None if labels is None else tuple(labels))

        validate(self)

        # renormalize exactly once at ingestion
        object.__setattr__(self, 'px', _frozen(px / _helper.fsum(px), float))
        object.__setattr__(self, 'f', _frozen(f, int))
        if self.h is not None:
            object.__setattr__(self, 'h', _frozen(self.h, int))

    def __setattr__(self, name: str, value: Any) -> None:
        raise AttributeError(f"{self.__class__.__name__} is immutable")

    def __repr__(self) -> str:
        return (f"<DataModel r={self.r} k={self.k}"
                f"{'' if self.h is None else f' m={self.m}'}>")

    __str__ = __repr__

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, DataModel):
            return NotImplemented
        same_h = (self.h is None and other.h is None) or (
            self.h is not None and other.h is not None
            and np.array_equal(self.h, other.h))
        return (np.array_equal(self.px, other.px)
                and np.array_equal(self.f, other.f)
                and self.k == other.k and same_h)

    __hash__ = None  # type: ignore

    @property
    def r(self) -> int:
        return int(self.px.size)

    @property
    def has_predicate(self) -> bool:
        return self.h is not None

    @property
    def digest(self) -> str:
        return _helper.digest(self.px, self.f, self.h)

    def cell(self, i: int) -> np.ndarray:
        """The preimage f^-1(i)."""
        return np.flatnonzero(self.f == i)

    def with_predicate(
        self, h: Sequence[int], m: Optional[int] = None
    ) -> DataModel:
        return DataModel(self.px, self.f, h, k=self.k, m=m,
                         labels=self.labels)

    def relabel(self, perm: Sequence[int]) -> DataModel:
        """Rename function labels: new label t stands for old label
        ``perm[t]``."""
        inv = _helper.inverse_permutation(perm)
        return DataModel(self.px, inv[self.f], self.h, k=self.k, m=self.m,
                         labels=self.labels)

    def todict(self) -> dict:
        data = {'px': [float(p) for p in self.px],
                'f': [int(i) for i in self.f]}
        if self.h is not None:
            data['h'] = [int(j) for j in self.h]
        if self.labels is not None:
            data['labels'] = list(self.labels)
        return data


def _label_count(labels: np.ndarray) -> int:
    return int(labels.max()) + 1 if labels.size else 0


def _check_labels(labels: np.ndarray, size: int, r: int, name: str) -> None:
    if labels.size != r:
        raise err.InvalidValueError(
            f"{name} has {labels.size} entries, px has {r}")
    if size < 2:
        raise err.AlphabetTooSmall(
            f"{name} alphabet has {size} symbols, at least 2 required")
    if labels.size and (labels.min() < 0 or labels.max() >= size):
        raise err.InvalidValueError(
            f"{name} labels must lie in 0..{size - 1}")
    missing = np.setdiff1d(np.arange(size), labels)
    if missing.size:
        raise err.NotSurjective(
            f"{name} leaves label {int(missing[0])} without preimage")


def validate(model: DataModel) -> bool:
    """Return True if every standing assumption holds, raise the first
    violation otherwise."""
    px = model.px
    if px.ndim != 1 or px.size < 2:
        raise err.AlphabetTooSmall("data alphabet needs at least 2 symbols")
    if not np.all(np.isfinite(px)) or np.any(px <= 0):
        raise err.NonPositiveMass
    total = _helper.fsum(px)
    if abs(total - 1.0) > _const.TOL.INPUT:
        raise err.NotNormalized(tol=_const.TOL.INPUT)
    _check_labels(model.f, model.k, px.size, 'f')
    if model.h is not None:
        _check_labels(model.h, model.m, px.size, 'h')
    if model.labels is not None and len(model.labels) != px.size:
        raise err.InvalidValueError("labels must have one entry per symbol")
    return True


class SupportStats:
    """ Support statistics of an instance: the most probable symbol,
    the most probable symbol within every function cell and the critical
    recoverability level below which the best mechanism says nothing
    about X. The predicate part is populated iff the model has one.
    """

    def __init__(self, model: DataModel) -> None:
        px = model.px
        self.k = model.k
        self.x_star = _helper.argmax(px)
        self.i_star = int(model.f[self.x_star])

        x_i_star: List[int] = []
        for i in range(model.k):
            cell = model.cell(i)
            x_i_star.append(int(cell[_helper.argmax(px[cell])]))
        self.x_i_star = tuple(x_i_star)
        self.masses = px[list(x_i_star)].copy()
        self.masses.setflags(write=False)
        self.sum_xi_star = _helper.fsum(self.masses)
        self.p_star = float(px[self.x_star])
        self.rho_c = self.p_star / self.sum_xi_star

        self.joint_mass = None
        self.predicate_mass = None
        self.j_star = None
        self.j_i_star = None
        self.sum_joint_star = None
        self.rho_c_prime = None
        if model.h is not None:
            joint = np.zeros((model.k, model.m))
            np.add.at(joint, (model.f, model.h), px)
            joint.setflags(write=False)
            self.joint_mass = joint
            predicate_mass = joint.sum(axis=0)
            self.predicate_mass = predicate_mass
            self.j_star = _helper.argmax(predicate_mass)
            self.j_i_star = tuple(
                _helper.argmax(joint[i]) for i in range(model.k))
            self.sum_joint_star = _helper.fsum(joint.max(axis=1))
            self.rho_c_prime = min(
                1.0, float(predicate_mass[self.j_star]) / self.sum_joint_star)

        logger.debug(
            "support stats: x*=%d i*=%d rho_c=%.6g sum=%.6g",
            self.x_star, self.i_star, self.rho_c, self.sum_xi_star)

    def __repr__(self) -> str:
        return (f"<SupportStats x*={self.x_star} rho_c={self.rho_c:.6g}"
                f" sum={self.sum_xi_star:.6g}>")

    __str__ = __repr__

    @property
    def has_predicate(self) -> bool:
        return self.joint_mass is not None

    def todict(self) -> dict:
        data = {
            'x_star': self.x_star,
            'i_star': self.i_star,
            'x_i_star': list(self.x_i_star),
            'sum_xi_star': self.sum_xi_star,
            'rho_c': self.rho_c,
        }
        if self.has_predicate:
            data.update(
                j_star=self.j_star,
                j_i_star=list(self.j_i_star),
                joint_mass=self.joint_mass.tolist(),
                rho_c_prime=self.rho_c_prime,
            )
        return data


def support_stats(model: DataModel) -> SupportStats:
    return SupportStats(model)


def _positive_joint(joint: Any) -> np.ndarray:
    joint = np.array(joint, dtype=float)
    if joint.ndim != 2:
        raise err.InvalidValueError("joint pmf must be a 2-d table")
    if not np.all(np.isfinite(joint)) or np.any(joint <= 0):
        raise err.NonPositiveMass
    return joint


def lift_randomized_function(joint: Any, f: Sequence[int]) -> DataModel:
    """ Privacy of a randomized function Y of X, released through
    function f of X: the data becomes the pair (X, Y) indexed x*m + y,
    the predicate is Y and the function is f(X).
    """
    joint = _positive_joint(joint)
    rx, m = joint.shape
    f = np.asarray(f, dtype=int)
    if f.size != rx:
        raise err.InvalidValueError(
            f"f has {f.size} entries, the joint table has {rx} rows")
    xs, ys = np.divmod(np.arange(rx * m), m)
    return DataModel(joint.ravel(), f[xs], ys, m=m)


def lift_private_nonprivate(joint: Any) -> DataModel:
    """ Private data X correlated with nonprivate data Y that is released
    through responses: the data becomes (X, Y), the predicate is X and
    the function is Y.
    """
    joint = _positive_joint(joint)
    rx, ry = joint.shape
    xs, ys = np.divmod(np.arange(rx * ry), ry)
    return DataModel(joint.ravel(), ys, xs, k=ry, m=rx)
