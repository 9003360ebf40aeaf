"""Exception hierarchy.

Everything raised on bad data derives from :class:`SevlabError`; the CLI maps
those to exit code 1.
"""


class SevlabError(Exception):
    """Base class for domain errors (bad data, degenerate inputs)."""


class IntermediateMissingness(SevlabError):
    def __init__(self, header, fraction):
        super().__init__(
            f"feature {header!r} has {fraction:.1%} missing values, between the "
            "impute and drop thresholds"
        )
        self.header = header
        self.fraction = fraction


class UnknownCategory(SevlabError):
    def __init__(self, header, code):
        super().__init__(f"code {code} is not a declared category of {header!r}")
        self.header = header
        self.code = code


class SchemaError(SevlabError):
    pass


class EmptyClass(SevlabError):
    pass


class KTooLarge(SevlabError):
    pass


class Malformed(SevlabError):
    pass


class InconsistentTotals(SevlabError):
    def __init__(self, header, detail=""):
        super().__init__(f"class totals of feature {header!r} disagree with the spec {detail}".strip())
        self.header = header


class FractionalInput(SevlabError):
    pass


class TooFewMinority(SevlabError):
    pass


class ColumnMismatch(SevlabError):
    pass


class WrongKind(SevlabError):
    pass


class LengthMismatch(SevlabError):
    pass


class EmptyMatrix(SevlabError):
    pass


class SingleClass(SevlabError):
    pass


class NonFinite(SevlabError):
    pass
