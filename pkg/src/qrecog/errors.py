"""Exception hierarchy.

Two families map onto CLI exit codes: ``InputError`` (exit 1) for
unreadable or malformed input, ``ConsistencyError`` (exit 2) for
dimension and structural violations.
"""


class QRecogError(ValueError):
    """Base class for all errors raised by this package."""


class InputError(QRecogError):
    pass


class ConsistencyError(QRecogError):
    pass


class ImageParseError(InputError):
    """Malformed image data; ``offset`` is the byte position of the fault."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class ZeroVectorError(InputError):
    pass


class InvalidStateError(InputError):
    pass


class ConfigError(InputError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid config: " + "; ".join(self.problems))


class DimensionMismatchError(ConsistencyError):
    def __init__(self, a: int, b: int):
        super().__init__(f"dimension mismatch: {a} != {b}")
        self.dims = (a, b)


class LinearDependenceError(ConsistencyError):
    def __init__(self, index: int, residual: float):
        super().__init__(
            f"image {index} is linearly dependent on earlier images "
            f"(residual norm {residual:.3g})"
        )
        self.index = index
        self.residual = residual


class NonOrthonormalError(ConsistencyError):
    pass


class CorruptMemoryError(ConsistencyError):
    pass
