"""Exception hierarchy for the gaitpipe toolkit.

All errors raised by the library derive from GaitPipeError so callers can
distinguish data/usage problems from programming bugs.
"""


class GaitPipeError(Exception):
    """Base class for all gaitpipe errors."""


# --- data ingestion ---------------------------------------------------------

class MalformedRow(GaitPipeError):
    def __init__(self, line_number, detail=""):
        self.line_number = line_number
        msg = f"malformed row at line {line_number}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class NonMonotoneTimestamp(GaitPipeError):
    def __init__(self, line_number):
        self.line_number = line_number
        super().__init__(f"timestamp not strictly increasing at line {line_number}")


class EmptyFile(GaitPipeError):
    pass


class NegativeSpeed(GaitPipeError):
    pass


class BadManifest(GaitPipeError):
    pass


class IrregularSampling(GaitPipeError):
    pass


# --- dsp --------------------------------------------------------------------

class SignalTooShort(GaitPipeError):
    pass


class InvalidOverlap(GaitPipeError):
    pass


class InvalidCutoff(GaitPipeError):
    pass


class EvenTapCount(GaitPipeError):
    pass


# --- alignment --------------------------------------------------------------

class EmptyWindow(GaitPipeError):
    pass


class DegenerateGravity(GaitPipeError):
    pass


# --- imaging ----------------------------------------------------------------

class WindowTooShort(GaitPipeError):
    pass


class EmptyDataset(GaitPipeError):
    pass


class ConstantColumn(GaitPipeError):
    pass


class TooFewImages(GaitPipeError):
    pass


# --- neural net -------------------------------------------------------------

class ShapeMismatch(GaitPipeError):
    pass


class BatchTooSmall(GaitPipeError):
    pass


class InputTooSmall(GaitPipeError):
    pass


class Divergence(GaitPipeError):
    """Training loss became non-finite; carries the last finite-loss epoch."""

    def __init__(self, msg, history=None):
        super().__init__(msg)
        self.history = list(history) if history is not None else []


class CorruptModelFile(GaitPipeError):
    pass


# --- synthetic generator / pipeline ----------------------------------------

class InvalidParams(GaitPipeError):
    pass


class InsufficientImages(GaitPipeError):
    def __init__(self, requested, available):
        self.requested = requested
        self.available = available
        super().__init__(
            f"requested {requested} training images but only {available} available"
        )
