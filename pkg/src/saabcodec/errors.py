"""Exception types shared across the package."""


class SaabCodecError(Exception):
    """Base class for all package errors."""


class InsufficientDataError(SaabCodecError):
    """Raised when too few samples are supplied for a statistical operation."""


class InvalidInputError(SaabCodecError):
    """Raised on malformed numerical input (non-finite values, bad shapes)."""


class DegenerateInputError(SaabCodecError):
    """Raised when an input is technically valid but statistically degenerate."""


class BitstreamError(SaabCodecError):
    """Raised on malformed or truncated bitstreams.

    Carries the bit offset at which decoding failed when known.
    """

    def __init__(self, message, bit_offset=None):
        if bit_offset is not None:
            message = f"{message} (bit offset {bit_offset})"
        super().__init__(message)
        self.bit_offset = bit_offset


class NoOverlapError(SaabCodecError):
    """Raised when two RD curves share no PSNR interval for BD integration."""


class ExperimentStageError(SaabCodecError):
    """Wraps a failure inside an experiment run with its (clip, qp, strategy)."""

    def __init__(self, clip, qp, strategy, cause):
        super().__init__(f"experiment stage failed (clip={clip}, qp={qp}, strategy={strategy}): {cause}")
        self.clip = clip
        self.qp = qp
        self.strategy = strategy
        self.cause = cause


class StarvedGroupError(SaabCodecError):
    """Raised when a kernel training group has too few residuals.

    ``starved`` maps kernel index -> sorted list of intra modes in the group.
    """

    def __init__(self, starved):
        self.starved = dict(starved)
        parts = ", ".join(
            f"kernel {k} (modes {sorted(modes)})" for k, modes in sorted(self.starved.items())
        )
        super().__init__(f"insufficient training residuals for: {parts}")
