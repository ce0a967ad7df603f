"""
Abstract values and access paths shared by every analysis module.

Literal values are plain Python ``int`` and ``str`` objects; the three
special members of the value domain are module-level singletons.
"""

from dataclasses import dataclass


class Special:
    """A distinguished abstract value (statically-unknown, undefined, unknown-field name)."""

    __slots__ = ("name", "_rank")

    def __init__(self, name, rank):
        self.name = name
        self._rank = rank

    def __repr__(self):
        return self.name

    def __reduce__(self):
        return self.name


STAR = Special("STAR", 2)
UNDEF = Special("UNDEF", 3)
BULLET = Special("BULLET", 4)

SPECIALS = (STAR, UNDEF, BULLET)


def is_literal(value):
    return isinstance(value, (int, str)) and not isinstance(value, bool)


def value_key(value):
    """Sort key: ints ascending, then strings, then star, undef, bullet."""
    if isinstance(value, Special):
        return (value._rank, 0, "")
    if isinstance(value, int):
        return (0, value, "")
    return (1, 0, value)


def sorted_values(values):
    return sorted(values, key=value_key)


def format_value(value):
    if value is STAR:
        return "star"
    if value is UNDEF:
        return "undef"
    if value is BULLET:
        return "•"
    if isinstance(value, str):
        return repr(value)
    return str(value)


def value_to_json(value):
    if value is STAR:
        return "star"
    if value is UNDEF:
        return "undef"
    if value is BULLET:
        return "bullet"
    if isinstance(value, int):
        return {"int": value}
    return {"str": value}


def value_from_json(obj):
    if obj == "star":
        return STAR
    if obj == "undef":
        return UNDEF
    if obj == "bullet":
        return BULLET
    if "int" in obj:
        return int(obj["int"])
    return str(obj["str"])


@dataclass(frozen=True)
class Atom:
    """An access path consisting of a single value."""

    value: object

    def __str__(self):
        return format_value(self.value)


@dataclass(frozen=True)
class Seq:
    """An access path ``[][AP_1]...[AP_n]``; one element per array dimension."""

    elements: tuple = ()

    def __len__(self):
        return len(self.elements)

    def __str__(self):
        return "[]" + "".join("[%s]" % e for e in self.elements)


def literal_path(*names):
    """Build a fully resolved ``Seq`` from index names, e.g. ``literal_path('arr', 1, 2)``."""
    return Seq(tuple(Atom(n) for n in names))


class AnalysisError(Exception):
    pass


class InternalError(AnalysisError):
    """A contract violation inside the abstract domain."""


class DuplicateIndex(AnalysisError):
    pass


class IterationLimitExceeded(AnalysisError):
    pass
