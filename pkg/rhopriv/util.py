"""
    rhopriv.util
    ~~~~~~~~~~~~
"""
from __future__ import annotations

from collections.abc import Mapping
from functools import wraps
from typing import Any, Callable, Dict, Type


__all__ = (
    'adict',
    'adictformatter',
    'formatadict',
    'singleton',
)


class adict(dict):  # pylint: disable=invalid-name
    """ dict with attribute access, used for reports and constant
    tables:

    >>> report = adict(value=0.4, method='naive-enumeration')
    >>> report.value
    0.4
    """

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        keys = kwargs.pop("__keys__", None)
        values = kwargs.pop("__values__", None)
        super().__init__(*args, **kwargs)
        if keys and values:
            self.update(zip(keys, values))

    def __getattr__(self, key: str) -> Any:
        try:
            return self[key]
        except KeyError:
            raise AttributeError(f"adict object has no attribute {key}")

    def __setattr__(self, key: str, value: Any) -> None:
        self[key] = value

    def __iadd__(self, other: Dict[str, Any]) -> adict:
        self.update(other)
        return self

    def __add__(self, other: Dict[str, Any]) -> adict:
        merged = self.copy()
        merged.update(other)
        return merged

    def copy(self) -> adict:
        return adict(super().copy())


def adictformatter(func: Callable):
    """ Decorator turning the returned dict, or list of dicts, into
    adict all the way down.
    """

    @wraps(func)
    def convert(*args, **kwargs):
        return formatadict(func(*args, **kwargs))

    return convert


def _convert(value: Any) -> Any:
    if isinstance(value, Mapping):
        return adict((k, _convert(v)) for k, v in value.items())
    if isinstance(value, list):
        return [_convert(v) for v in value]
    return value


def formatadict(original: Any) -> Any:
    if original is None:
        return original
    if isinstance(original, Mapping):
        return _convert(original)
    if isinstance(original, (list, tuple)):
        if not all(isinstance(item, Mapping) for item in original):
            raise TypeError(
                f"invalid data type '{original}' to convert `adict`")
        return [_convert(item) for item in original]
    raise TypeError(f"invalid data type '{original}' to convert `adict`")


def singleton(cls: Type):
    """One shared instance per decorated class; later constructor
    arguments are ignored."""

    instances = {}

    @wraps(cls)
    def getinstance(*args, **kwargs):
        if cls not in instances:
            instances[cls] = cls(*args, **kwargs)
        return instances[cls]

    return getinstance
