"""Exception hierarchy.

Every failure mode raised by the package derives from :class:`EllipsoidError`
(itself a ``ValueError``), so callers can catch the whole family at once or a
specific condition when they know how to recover from it.
"""


class EllipsoidError(ValueError):
    pass


class InvalidSpec(EllipsoidError):
    """Semi-axes fail validation (non-positive, unsorted, inconsistent tag)."""


class DegenerateAxes(EllipsoidError):
    """An operation needs distinct axes but two of them coincide."""


class WrongSymmetry(EllipsoidError):
    """An operation was called on a spec with the wrong symmetry tag."""


class DegeneratePoint(EllipsoidError):
    """Position too close to the origin for the Dirac structure to exist."""


class OffLeaf(EllipsoidError):
    """A phase point is too far from the constraint leaf to be projected."""


class ProjectionFailed(EllipsoidError):
    pass


class ContourFailed(EllipsoidError):
    pass


class CoordinateSingularity(EllipsoidError):
    """Point lies inside the tube around a coordinate hyperplane."""


class LeafIncompatible(EllipsoidError):
    pass


class OutsideImage(EllipsoidError):
    """Integral values lie outside the image of the energy-momentum map."""


class PoleHit(EllipsoidError):
    pass


class AxisPoint(EllipsoidError):
    """Point on the rotation axis, where the regular reduction is undefined."""


class NotOnSubflow(EllipsoidError):
    pass


class PoleCollision(EllipsoidError):
    """A branch point sits on the pole at alpha_1 (j = 0 too close to g = 0)."""


class ZeroMomentum(EllipsoidError):
    pass


class NonIntegerTransition(EllipsoidError):
    pass


class LoopOutsideImage(EllipsoidError):
    pass


class NotParabolic(EllipsoidError):
    pass


class DomainError(EllipsoidError):
    pass


class BandCollapsed(EllipsoidError):
    pass
