"""Exception hierarchy.

Everything raised on bad input derives from :class:`AfibError` (and from
``ValueError``, so callers that only know the builtin still catch it).
:class:`NumericError` marks failures of the numerical layer rather than of
the input data; the CLI maps the two families to different exit codes.
"""


class AfibError(ValueError):
    pass


class NumericError(AfibError):
    pass


# preprocess
class EmptyRecording(AfibError):
    pass


class NonMonotonicTime(AfibError):
    pass


class InvalidBand(AfibError):
    pass


class ZeroVariance(NumericError):
    pass


class TooFewBeats(AfibError):
    pass


# features / hvg
class SeriesTooShort(AfibError):
    pass


class NonPositiveInterval(AfibError):
    pass


class NoEdges(AfibError):
    pass


# classifier / eval
class SingleClass(NumericError):
    pass


class NonFiniteFeature(NumericError):
    pass


class UndefinedMetric(NumericError):
    pass


class TooFewPerClass(NumericError):
    pass


# synth
class InvalidSpec(AfibError):
    pass


class InvalidRate(AfibError):
    pass


class FormatError(AfibError):
    """A file could not be parsed in the expected format."""
