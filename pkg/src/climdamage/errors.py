"""Exception types shared across the package.

Two failure families are kept apart so callers (and the command line tool)
can map them to distinct exit codes: bad inputs versus computations that
cannot proceed on inputs that were individually valid.
"""


class ValidationError(ValueError):
    """An input file, array, or argument violates a structural contract."""


class ComputationError(RuntimeError):
    """Inputs were well formed but the requested computation is impossible.

    Examples: a regression against a constant series, a decomposition with a
    zero denominator, harmonizing regions whose losses sum to zero while the
    global loss does not.
    """
