"""Exception types raised across the package."""


class SBSCError(ValueError):
    """Base class for all errors raised by sbsc."""


class ZeroColumn(SBSCError):
    def __init__(self, index):
        self.index = int(index)
        super().__init__(f"column {self.index} has (near) zero norm")


class InvalidSpec(SBSCError):
    pass


class ParseError(SBSCError):
    def __init__(self, line, msg="could not parse input"):
        self.line = int(line)
        super().__init__(f"line {self.line}: {msg}")


class BadDmax(SBSCError):
    pass


class MissingLabels(SBSCError):
    pass


class NonFiniteInput(SBSCError):
    pass


class DegenerateSubcluster(SBSCError):
    def __init__(self, index):
        self.index = int(index)
        super().__init__(f"sub-cluster {self.index} has no positive eigenvalue")


class BadThreshold(SBSCError):
    pass


class EigenFailure(SBSCError):
    pass


class EmptyClass(SBSCError):
    def __init__(self, label):
        self.label = int(label)
        super().__init__(f"class {self.label} has no training points")


class LengthMismatch(SBSCError):
    pass


class BadConstants(SBSCError):
    pass


class AssumptionViolated(SBSCError):
    def __init__(self, failed):
        self.failed = list(failed)
        super().__init__("assumptions violated: " + "; ".join(self.failed))
