"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Raised when arguments violate a documented precondition."""


class NumericalError(RuntimeError):
    """Raised when a numerical routine fails (eigensolve, factorization, ...)."""


class StencilOutOfBoundsError(NumericalError):
    """A finite-difference stencil point fell outside the parameter bounds."""


class SamplerError(RuntimeError):
    """A sampler failed part-way; ``partial_chain`` holds what was produced."""

    def __init__(self, message, partial_chain=None):
        super().__init__(message)
        self.partial_chain = partial_chain


class ConfigError(InvalidInputError):
    """Configuration problem tied to a key (and, when known, a line)."""

    def __init__(self, message, key=None, line=None):
        where = ""
        if key is not None:
            where = f"[{key}"
            if line is not None:
                where += f", line {line}"
            where += "] "
        super().__init__(where + message)
        self.key = key
        self.line = line
