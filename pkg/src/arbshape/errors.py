"""Exception types shared across the package.

Every error carries a stable ``exit_code`` so the command line front end can
map failures to distinct process exit statuses.
"""


class ArbShapeError(Exception):
    exit_code = 1


class ConfigError(ArbShapeError, ValueError):
    exit_code = 2


class ImageFormatError(ArbShapeError):
    exit_code = 3


class EmptyShape(ArbShapeError):
    exit_code = 4


class DegenerateShape(ArbShapeError):
    exit_code = 5


class OutOfFrame(ArbShapeError):
    exit_code = 6


class VanishedShape(ArbShapeError):
    exit_code = 7


class LengthMismatch(ArbShapeError, ValueError):
    exit_code = 8


class IndexMismatch(ArbShapeError):
    exit_code = 9
