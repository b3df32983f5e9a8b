class DimacsError(ValueError):
    """Malformed DIMACS input; ``lineno`` is 1-based."""

    def __init__(self, message, lineno):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno
        self.reason = message


class SizeError(ValueError):
    """Problem size outside what an operation accepts (caps, n < 3, ...)."""
