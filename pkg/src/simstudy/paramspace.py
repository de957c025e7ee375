"""Parameter spaces: named axes of values whose cartesian product is the study grid."""

from __future__ import annotations

import itertools
import re
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass

__all__ = [
    "Configuration",
    "InvalidSpaceError",
    "ParamSpace",
    "apply_filter",
    "cartesian_product",
]

_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

# The only value types the result tables can hold natively.  Anything
# richer has to go through a blob field.
_SCALAR_TYPES = (bool, int, float, str)


class InvalidSpaceError(ValueError):
    """Raised when axes violate the parameter-space invariants."""


def _check_axis(name, values) -> tuple:
    if not isinstance(name, str) or not _IDENT_RE.match(name):
        raise InvalidSpaceError(f"axis name {name!r} is not a valid identifier")
    values = tuple(values)
    if not values:
        raise InvalidSpaceError(f"axis {name!r} has no values")
    # bool is a subclass of int, so key on the exact type
    kinds = {type(v) for v in values}
    if len(kinds) != 1 or type(values[0]) not in _SCALAR_TYPES:
        raise InvalidSpaceError(
            f"axis {name!r} must hold one uniform scalar type "
            f"(text, float, integer or boolean), got {sorted(k.__name__ for k in kinds)}"
        )
    seen = set()
    for v in values:
        if v in seen:
            raise InvalidSpaceError(f"axis {name!r} has duplicate value {v!r}")
        seen.add(v)
    return values


class ParamSpace:
    """Ordered named axes; enumeration is row-major over declaration order.

    Accepts either a mapping ``{"axis": [values...]}`` (insertion order is
    the declaration order) or an iterable of ``(name, values)`` pairs.
    Immutable after construction; safe to share across threads/processes.
    """

    __slots__ = ("_axes",)

    def __init__(self, axes: Mapping[str, Sequence] | Iterable[tuple[str, Sequence]]):
        if isinstance(axes, Mapping):
            pairs = list(axes.items())
        else:
            pairs = [(n, v) for n, v in axes]
        if not pairs:
            raise InvalidSpaceError("a parameter space needs at least one axis")
        names = [n for n, _ in pairs]
        if len(set(names)) != len(names):
            raise InvalidSpaceError(f"duplicate axis names in {names}")
        self._axes = tuple((n, _check_axis(n, v)) for n, v in pairs)

    @property
    def axes(self) -> tuple[tuple[str, tuple], ...]:
        return self._axes

    @property
    def axis_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self._axes)

    def values(self, name: str) -> tuple:
        for n, v in self._axes:
            if n == name:
                return v
        raise KeyError(name)

    def size(self) -> int:
        n = 1
        for _, v in self._axes:
            n *= len(v)
        return n

    def configurations(self, keep: Callable[["Configuration"], bool] | None = None):
        configs = cartesian_product(self)
        return apply_filter(configs, keep) if keep is not None else configs

    def __repr__(self):
        inner = ", ".join(f"{n}={list(v)!r}" for n, v in self._axes)
        return f"ParamSpace({inner})"

    def __eq__(self, other):
        return isinstance(other, ParamSpace) and self._axes == other._axes

    def __hash__(self):
        return hash(self._axes)


@dataclass(frozen=True)
class Configuration:
    """One point of a parameter space, ordered by axis declaration.

    Equality is by name->value pairs regardless of order, so configurations
    read back from storage compare equal to freshly enumerated ones.
    """

    assignments: tuple[tuple[str, object], ...]

    def __post_init__(self):
        names = [n for n, _ in self.assignments]
        if len(set(names)) != len(names):
            raise InvalidSpaceError(f"duplicate axis names in configuration: {names}")

    def __getitem__(self, name: str):
        for n, v in self.assignments:
            if n == name:
                return v
        raise KeyError(name)

    def get(self, name: str, default=None):
        try:
            return self[name]
        except KeyError:
            return default

    def as_dict(self) -> dict:
        return dict(self.assignments)

    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.assignments)

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return self.as_dict() == other.as_dict()

    def __hash__(self):
        return hash(frozenset(self.assignments))

    def __repr__(self):
        inner = ", ".join(f"{n}={v!r}" for n, v in self.assignments)
        return f"Configuration({inner})"


def cartesian_product(space: ParamSpace) -> list[Configuration]:
    """Enumerate every combination of axis values, row-major over declaration order."""
    names = space.axis_names
    grids = [space.values(n) for n in names]
    return [
        Configuration(tuple(zip(names, combo)))
        for combo in itertools.product(*grids)
    ]


def apply_filter(
    configs: list[Configuration], keep: Callable[[Configuration], bool]
) -> list[Configuration]:
    """Keep exactly the configurations for which the predicate is true, preserving order."""
    return [c for c in configs if keep(c)]
