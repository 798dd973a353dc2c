"""
    rhopriv.g
    ~~~~~~~~~
"""
from __future__ import annotations

import os
import threading
import warnings
from typing import Optional

from . import _const, _logging, err, util


class EnvKey:
    """ Name of the environment variable holding the default worker
    count. ``DFT`` applies unless ``set`` chose another name.
    """

    DFT = 'RHO_PRIV_WORKERS'
    USER = ''

    _lock = threading.RLock()

    @classmethod
    def get(cls) -> Optional[str]:
        return os.environ.get(cls.USER or cls.DFT)

    @classmethod
    def set(cls, key: str) -> None:
        if not isinstance(key, str):
            raise TypeError(f"invalid key type({key!r}), must be str")

        with cls._lock:
            cls.USER = key


@util.singleton
class G:
    """ The configuration entry of rhopriv

    >>> import rhopriv
    >>>
    >>> g = rhopriv.G(workers=4)

    :param workers: Default worker count of the exact and simulated paths
    :param enumeration_cap: Largest outcome count enumerated naively
    :param debug: Log path selection details if true
    """

    def __init__(
        self,
        workers: Optional[int] = None,
        enumeration_cap: int = _const.CAP.ENUMERATION,
        debug: bool = False,
    ) -> None:
        self.configure(workers, enumeration_cap, debug)

    def __repr__(self):
        return (f"<rhopriv.G object, workers: {self.workers}, "
                f"debug: {self.debug}>")

    __str__ = __repr__

    def configure(
        self,
        workers: Optional[int] = None,
        enumeration_cap: Optional[int] = None,
        debug: Optional[bool] = None,
    ) -> None:
        self.workers = resolve_workers(workers)
        if enumeration_cap is not None:
            if enumeration_cap < 1:
                raise err.InvalidValueError(
                    f"enumeration cap must be positive, got {enumeration_cap}")
            self.enumeration_cap = int(enumeration_cap)
        if debug is not None:
            self.debug = bool(debug)
            _logging.set_debug(self.debug)

    def set_env_key(self, key: str) -> None:
        EnvKey.set(key)
        self.workers = resolve_workers(None)


def resolve_workers(workers: Optional[int] = None) -> int:
    """Explicit value, else the environment variable, else 1."""
    if workers is None:
        raw = EnvKey.get()
        if not raw:
            return 1
        try:
            workers = int(raw)
        except ValueError:
            warnings.warn(f"ignoring non-integer {EnvKey.USER or EnvKey.DFT}"
                          f"={raw!r}", err.ProgrammingWarning)
            return 1
    if workers < 1:
        raise err.InvalidValueError(
            f"worker count must be at least 1, got {workers}")
    return int(workers)


def workers(explicit: Optional[int] = None) -> int:
    if explicit is not None:
        return resolve_workers(explicit)
    return G().workers


def enumeration_cap() -> int:
    return G().enumeration_cap
