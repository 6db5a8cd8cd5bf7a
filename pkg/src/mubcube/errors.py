"""Exception hierarchy shared by all mubcube modules."""


class MubCubeError(ValueError):
    """Base class for every error raised by mubcube."""


class DimensionMismatch(MubCubeError):
    pass


class NonFiniteEntries(MubCubeError):
    pass


class NotUnimodular(MubCubeError):
    def __init__(self, index, deviation):
        self.index = tuple(int(i) for i in index)
        self.deviation = float(deviation)
        super().__init__(f"entry {self.index} has modulus deviating from 1 by {self.deviation:.3g}")


class NotOrthogonal(MubCubeError):
    def __init__(self, j, k, overlap, kind="columns"):
        self.j, self.k = int(j), int(k)
        self.overlap = float(overlap)
        self.kind = kind
        super().__init__(f"{kind} {self.j} and {self.k} have overlap {self.overlap:.3g}")


class NotUnitary(MubCubeError):
    def __init__(self, i, deviation):
        self.i = int(i)
        self.deviation = float(deviation)
        super().__init__(f"basis {self.i} is not unitary (deviation {self.deviation:.3g})")


class NotUnbiased(MubCubeError):
    def __init__(self, i, j, deviation):
        self.i, self.j = int(i), int(j)
        self.deviation = float(deviation)
        super().__init__(f"bases {self.i} and {self.j} are not unbiased (worst deviation {self.deviation:.3g})")


class NotEquivalent(MubCubeError):
    pass


class DimensionTooLarge(MubCubeError):
    pass


class DimensionNotSix(MubCubeError):
    pass


class NotRankOneProjection(MubCubeError):
    pass


class WeakConditionsFailed(MubCubeError):
    def __init__(self, report):
        self.report = report
        failed = [name for name, check in report.checks.items() if not check.passed]
        super().__init__(f"weak cube conditions failed: {', '.join(failed)}")


class ProjectionDefect(MubCubeError):
    def __init__(self, l, residual):
        self.l = int(l)
        self.residual = float(residual)
        super().__init__(f"R_{self.l} is not a rank-one projection (residual {self.residual:.3g})")


class ZeroEntry(MubCubeError):
    def __init__(self, index):
        self.index = tuple(int(i) for i in index)
        super().__init__(f"cube entry {self.index} is zero")


class OddLength(MubCubeError):
    pass


class PreconditionFailed(MubCubeError):
    pass


class NoPairingFound(MubCubeError):
    pass


class ReconstructionMismatch(MubCubeError):
    def __init__(self, residual):
        self.residual = float(residual)
        super().__init__(f"reconstructed triplet reproduces the cube only to {self.residual:.3g}")
