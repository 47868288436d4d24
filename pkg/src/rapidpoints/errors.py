"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """An argument violates an operation's precondition."""


class InsufficientResolutionError(InvalidArgumentError):
    """The path grid is too coarse for the requested stage."""


class DomainError(ValueError):
    """Parameters fall outside the region where a formula is valid."""


class EmptyMeasureError(RuntimeError):
    """A stage selected no intervals; the measure would be trivial."""


class ChainDiedError(RuntimeError):
    """The nested construction produced an empty stage.

    Carries the last surviving chain so callers can decide whether to
    resample or report partial results.
    """

    def __init__(self, stage, chain):
        super().__init__(f"construction died at stage {stage}: no surviving intervals")
        self.stage = stage
        self.chain = chain


class GridMismatchError(InvalidArgumentError):
    """Two spectra were sampled on different frequency grids."""
