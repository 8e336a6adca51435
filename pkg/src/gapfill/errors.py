"""Exception hierarchy shared across the toolkit.

Every error raised on a documented failure path derives from GapfillError so
the CLI can map it to a data/validation exit code.
"""


class GapfillError(Exception):
    """Base class for all toolkit errors."""


class ParseError(GapfillError):
    """Input file is syntactically malformed."""


class ValidationError(GapfillError):
    """Input is well-formed but violates a documented invariant."""


class EmptyCorpus(GapfillError):
    """Language-model training got no sentences."""


class PositionOutOfRange(GapfillError):
    """Gap position outside the sentence."""


class EmptyDocument(GapfillError):
    """Summarizer got a document with no sentences."""


class NoEligiblePositions(GapfillError):
    """No gap may be punched: every token is a stop-word or punctuation."""


class MissingModel(GapfillError):
    """Entropy gap strategy requires a language model."""


class IndivisibleDesign(GapfillError):
    """Configuration count does not divide the informant count."""


class InsufficientDocuments(GapfillError):
    """Fewer documents than configurations: full coverage impossible."""


class MissingSystemOutput(GapfillError):
    """A configuration references MT output absent from the bundle."""


class ProblemMismatch(GapfillError):
    """Response does not belong to the problem being scored."""


class NoApplicableQuestions(GapfillError):
    """No question has a nonzero weight under the chosen scheme."""


class EmptySample(GapfillError):
    """Statistic undefined on an empty sample."""


class LengthMismatch(GapfillError):
    """Paired samples have different lengths."""


class ZeroVariance(GapfillError):
    """Correlation undefined when a sample has no variance."""


class DegenerateX(GapfillError):
    """Through-origin fit undefined when all x are zero."""


class UnknownInformant(GapfillError):
    """Informant id not present in the experiment plan."""


class NotAssigned(GapfillError):
    """Problem not assigned to the submitting informant."""


class SchemaError(GapfillError):
    """External CSV is missing a required mapped column."""
