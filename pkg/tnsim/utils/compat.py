"""Standard-library names that only exist from Python 3.11 on."""

import sys
from enum import Enum

if sys.version_info >= (3, 11):
    from enum import StrEnum
    import tomllib
else:
    import tomli as tomllib

    class StrEnum(str, Enum):
        """Backport of :class:`enum.StrEnum` (members are, and print as, strings)."""

        def __new__(cls, *values):
            value = str(*values)
            member = str.__new__(cls, value)
            member._value_ = value
            return member

        __str__ = str.__str__
        __format__ = str.__format__

        @staticmethod
        def _generate_next_value_(name, start, count, last_values):
            return name.lower()

__all__ = ["StrEnum", "tomllib"]
