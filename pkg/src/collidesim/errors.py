"""Failure types the CLI maps onto distinct exit codes."""


class DenseLimitError(RuntimeError):
    """A dense object would exceed the configured qubit budget."""


class NumericalError(RuntimeError):
    """A numerical invariant (residue, drift, tolerance) was violated."""
