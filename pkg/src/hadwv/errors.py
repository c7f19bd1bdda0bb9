"""Exception and warning types shared across the simulator."""


class HadwvError(Exception):
    """Base class for all simulator errors."""


class NonPowerOfTwo(HadwvError, ValueError):
    """Requested matrix order is not a power of two."""


class OrderOutOfRange(HadwvError, ValueError):
    """Requested matrix order falls outside the supported range."""


class DimensionMismatch(HadwvError, ValueError):
    """Vector or pattern length does not match the expected dimension."""


class InvalidTernaryEntry(HadwvError, ValueError):
    """Sign vector contains an entry outside {-1, 0, +1}."""


class SingularMatrix(HadwvError, ValueError):
    """Measurement matrix is not invertible."""


class InvalidDimensions(HadwvError, ValueError):
    """Array dimensions must be positive."""


class CoarseResetForbidden(HadwvError, ValueError):
    """Coarse pulses only support the SET direction."""


class IndexOutOfRange(HadwvError, IndexError):
    """Cell coordinates fall outside the array."""


class LevelOutOfRange(HadwvError, ValueError):
    """Cell level outside [0, 2**bits_per_cell - 1]."""


class TargetOutOfRange(HadwvError, ValueError):
    """Comparison target code outside the ADC code range."""


class CodeOutOfRange(HadwvError, ValueError):
    """Weight code does not fit the configured bit width."""


class TargetNotRepresentable(HadwvError, ValueError):
    """Column target vector is not representable at the configured precision."""


class ConfigInconsistent(HadwvError, ValueError):
    """Write-verify configuration violates an internal constraint."""


class InvalidSpec(HadwvError, ValueError):
    """Experiment specification is malformed."""


class OutputUnwritable(HadwvError, OSError):
    """Experiment output directory cannot be created or written."""


class UnknownEventKind(HadwvError, ValueError):
    """Cost ledger was asked to charge an unrecognized event kind."""


class AllZeroTensor(UserWarning):
    """Quantizer input was all zeros; scale defaults to 1."""
