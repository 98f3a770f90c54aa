"""Exception types shared across the package."""


class NumericError(RuntimeError):
    """A numerical procedure failed to produce a usable result.

    Raised when a root bracket cannot be established, a quadrature result
    is unusable, or a solver runs into degenerate input that validation
    could not catch statically.  The command line maps this to exit code 2,
    as opposed to configuration errors (ValueError) which map to exit 1.
    """
