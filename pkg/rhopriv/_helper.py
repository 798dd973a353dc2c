"""
    rhopriv._helper
    ~~~~~~~~~~~~~~~
"""
from __future__ import annotations

import hashlib
import json
import math
from typing import Any, Iterator, Optional, Sequence, Tuple

import numpy as np
from scipy import special

from . import err


def argmax(values: Sequence[float]) -> int:
    """Index of the maximum, lowest index on ties."""
    return int(np.argmax(np.asarray(values)))


def stable_desc_order(values: Sequence[float]) -> np.ndarray:
    """Indices sorting ``values`` nonincreasing, original order on ties."""
    return np.argsort(-np.asarray(values, dtype=float), kind='stable')


def inverse_permutation(perm: Sequence[int]) -> np.ndarray:
    perm = np.asarray(perm, dtype=int)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.size)
    return inv


def compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """Generate every tuple of ``parts`` nonnegative ints summing
    to ``total``, in lexicographic order."""
    if parts == 1:
        yield (total,)
        return
    for value in range(total + 1):
        for rest in compositions(total - value, parts - 1):
            yield (value,) + rest


def composition_count(total: int, parts: int) -> int:
    return math.comb(total + parts - 1, parts - 1)


def composition_batches(
    total: int, parts: int, size: int = 65536
) -> Iterator[np.ndarray]:
    batch = []
    for comp in compositions(total, parts):
        batch.append(comp)
        if len(batch) == size:
            yield np.array(batch, dtype=float)
            batch = []
    if batch:
        yield np.array(batch, dtype=float)


def log_multinomial(counts: np.ndarray) -> np.ndarray:
    """Natural log of n! / prod(c_i!) for each row of ``counts``."""
    counts = np.atleast_2d(np.asarray(counts, dtype=float))
    n = counts.sum(axis=1)
    return special.gammaln(n + 1) - special.gammaln(counts + 1).sum(axis=1)


def fsum(values: Any) -> float:
    return math.fsum(np.asarray(values, dtype=float).ravel())


def check_probability(value: float, tol: float, what: str) -> float:
    """Clip a computed probability into [0, 1], rejecting excursions
    larger than ``tol``."""
    if value < -tol or value > 1 + tol:
        raise err.NumericalError(f"{what} = {value!r} outside [0, 1]")
    return min(1.0, max(0.0, value))


def fmt_float(value: float) -> str:
    """17 significant digits, round-trip exact."""
    if math.isinf(value):
        return '"inf"' if value > 0 else '"-inf"'
    if math.isnan(value):
        raise err.NumericalError("nan cannot be serialized")
    return format(value, '.17g')


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """Deterministic JSON: insertion key order, floats with
    17 significant digits, infinities as strings."""
    pad = ' ' * (indent * (_level + 1))
    end = ' ' * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return '{}'
        items = [
            f'{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}'
            for k, v in obj.items()
        ]
        return '{\n' + ',\n'.join(items) + '\n' + end + '}'
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return '[]'
        if all(not isinstance(v, (dict, list, tuple, np.ndarray))
               for v in seq):
            return '[' + ', '.join(dumps(v, indent, _level) for v in seq) + ']'
        items = [f'{pad}{dumps(v, indent, _level + 1)}' for v in seq]
        return '[\n' + ',\n'.join(items) + '\n' + end + ']'
    if isinstance(obj, (bool, np.bool_)):
        return 'true' if obj else 'false'
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(float(obj))
    if obj is None:
        return 'null'
    return json.dumps(str(obj))


def digest(
    px: Sequence[float],
    f: Sequence[int],
    h: Optional[Sequence[int]] = None,
) -> str:
    payload = {
        'px': [fmt_float(float(p)) for p in px],
        'f': [int(i) for i in f],
        'h': None if h is None else [int(j) for j in h],
    }
    text = json.dumps(payload, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(text.encode('utf-8')).hexdigest()
