"""Exception types raised by geometric constructions and checks.

Every error that corresponds to a localized numerical failure carries a
``where`` attribute (a vertex / edge / quad locator) and the offending
``residual`` so callers can report the worst element.
"""


class GeometryError(Exception):
    """Base class for geometric failures."""

    def __init__(self, message, where=None, residual=None):
        super().__init__(message)
        self.where = where
        self.residual = residual


class ClosednessError(GeometryError):
    """A 1-form required to be closed has a quad residual above tolerance."""


class FlatnessError(GeometryError):
    """A connection required to be flat fails the quad holonomy test."""


class NotKoenigsError(GeometryError):
    """Moutard-lift propagation around a quad is inconsistent."""


class NotDualError(GeometryError):
    """Edge stretch ratios do not factor as r_i * r_j."""


class ChartError(GeometryError):
    """An affine chart is degenerate on the image of the net."""


class DegeneracyError(GeometryError):
    """A regularity margin was violated during a construction."""


class EvolutionError(DegeneracyError):
    """Cauchy evolution hit an isotropic diagonal."""


class PropagationError(DegeneracyError):
    """Transform propagation hit a vanishing denominator."""


class SpectralCollisionError(GeometryError):
    """A spectral parameter coincides with an edge label."""


class SeedDegeneracyError(GeometryError):
    """No admissible seed was found within the retry budget."""


class PointAtInfinityError(GeometryError):
    """A null line lies in the polar hyperplane of the chart vector."""


class FrameError(GeometryError):
    """Frame incidence conditions fail for the given net."""


class GaugeError(GeometryError):
    """A gauge normalization could not be solved."""


class GenerationError(GeometryError):
    """A randomized generator exhausted its retries."""


class FormatError(GeometryError):
    """A file or field does not satisfy the requested format."""
