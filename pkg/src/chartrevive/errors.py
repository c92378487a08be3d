"""Exception hierarchy shared by every stage of the pipeline."""


class ChartReviveError(Exception):
    """Base class for all errors raised by chartrevive."""


# svg core
class MalformedXml(ChartReviveError):
    pass


class MissingViewport(ChartReviveError):
    pass


class PathSyntax(ChartReviveError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class EmptyGeometry(ChartReviveError):
    pass


class ColorSyntax(ChartReviveError):
    pass


class UnsupportedTransform(ChartReviveError):
    pass


# graph
class GraphTooLarge(ChartReviveError):
    pass


class MalformedOwnership(ChartReviveError):
    pass


# neural
class DimMismatch(ChartReviveError):
    pass


class LabelOutOfRange(ChartReviveError):
    pass


class NonFiniteLoss(ChartReviveError):
    def __init__(self, epoch: int):
        super().__init__(f"non-finite loss at epoch {epoch}")
        self.epoch = epoch


class VersionMismatch(ChartReviveError):
    pass


class ChecksumMismatch(ChartReviveError):
    pass


# dataset
class InvalidSpec(ChartReviveError):
    pass


# recovery
class InsufficientAxis(ChartReviveError):
    pass


class UnparsableLabel(ChartReviveError):
    def __init__(self, text: str):
        super().__init__(f"cannot parse numeric label {text!r}")
        self.text = text


class IdCollision(ChartReviveError):
    pass


class MalformedAcData(ChartReviveError):
    pass


# insights
class TooFewRows(ChartReviveError):
    pass


class UnknownField(ChartReviveError):
    pass


# narration
class WordCountMismatch(ChartReviveError):
    pass


class NonMonotoneTimings(ChartReviveError):
    pass


class MissingTimings(ChartReviveError):
    pass


# animation
class MarkerWordMissing(ChartReviveError):
    pass


class NoRelevantElements(ChartReviveError):
    pass


class SelectorMiss(ChartReviveError):
    pass


# cli
class UnsupportedChart(ChartReviveError):
    pass


class BadFlag(ChartReviveError):
    pass


class StageError(ChartReviveError):
    """Wraps an error raised inside a named pipeline stage."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause
