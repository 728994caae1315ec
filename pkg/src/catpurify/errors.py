"""Exception types shared across the package."""


class CapacityError(Exception):
    """A requested computation exceeds a hard size cap (qubits, ensemble
    entries, grid points, or GF(2) solver unknowns)."""


class DimensionError(ValueError):
    """Operands disagree on the number of parties or register sizes."""


class InternalInvariantError(AssertionError):
    """A self-check that should be unreachable fired; indicates a bug."""
