"""Exception hierarchy.

Every error carries a stable ``code`` string; the CLI reports it verbatim.
"""


class StopsmithError(ValueError):
    code = "StopsmithError"


class InvalidPermutation(StopsmithError):
    code = "InvalidPermutation"


class DuplicateEntries(StopsmithError):
    code = "DuplicateEntries"


class TooLarge(StopsmithError):
    code = "TooLarge"


class BadThreshold(StopsmithError):
    code = "BadThreshold"


class BadParameter(StopsmithError):
    code = "BadParameter"


class BadProbability(StopsmithError):
    code = "BadProbability"


class DomainError(StopsmithError):
    code = "DomainError"
