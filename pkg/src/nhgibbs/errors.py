"""Exception types shared across the package."""


class NhGibbsError(Exception):
    """Base class for all package errors."""


class Collinear(NhGibbsError):
    """Three points admit no circumcircle."""


class TorusTooSparse(NhGibbsError):
    """A canonical triangle's circumradius reaches L/4: the periodic
    triangulation cannot be certified for this configuration."""


class NotEnoughPoints(NhGibbsError):
    """Fewer candidates than the requested number of neighbors."""


class DuplicatePoint(NhGibbsError):
    """Insertion would violate simpleness (coincident coordinates)."""


class UnknownId(NhGibbsError):
    """Point identifier not present in the configuration."""


class OutsideWindow(NhGibbsError):
    """Coordinates fall outside the observation window."""


class InfeasibleBase(NhGibbsError):
    """The base configuration has infinite energy where a finite one is
    required."""


class Undefined(NhGibbsError):
    """The hardcore statistic is undefined for this pattern (too few
    points, or no admissible hardcore parameter)."""


class TooLarge(NhGibbsError):
    """Brute-force oracle invoked beyond its size guard."""


class NoFeasibleLattice(NhGibbsError):
    """No feasible initial lattice exists for these parameters."""


class EmptySampleSet(NhGibbsError):
    """An operation that needs samples received none."""


class InfeasibleAlpha(NhGibbsError):
    """The configuration has infinite energy at the requested hardcore
    parameter."""


class ConfigError(NhGibbsError):
    """Invalid run configuration (files, flags, or proposal mixtures)."""
