class PreconditionError(ValueError):
    """A statistical precondition of a procedure is violated (as opposed to malformed input)."""
