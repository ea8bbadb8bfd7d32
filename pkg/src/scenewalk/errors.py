"""Exception hierarchy shared by all scenewalk modules."""


class SceneWalkError(Exception):
    """Base class for all scenewalk errors."""


class NonSquare(SceneWalkError):
    """Matrix is not a square integer matrix of dimension >= 2."""


class NotUnimodular(SceneWalkError):
    """Matrix determinant is not exactly 1."""


class RootOfUnitySpectrum(SceneWalkError):
    """Characteristic polynomial has a cyclotomic factor; map is not ergodic."""


class InvalidModel(SceneWalkError):
    """Scenery model violates one of its structural constraints."""


class WindowTooLarge(SceneWalkError):
    """Requested scenery window exceeds the supported orbit length."""


class WindowTooSmall(SceneWalkError):
    """Scenery window does not cover the walk's range and auto-extend is off."""


class BadResolution(SceneWalkError):
    """Nonpositive grid resolution or bandwidth."""


class NegativeVariance(SceneWalkError):
    """A variance parameter is negative."""


class EmptySample(SceneWalkError):
    """An estimator was called with no samples."""


class InsufficientReps(SceneWalkError):
    """Too few replicates for the requested estimator."""


class InvalidBlocks(SceneWalkError):
    """Block indices are not ordered 0 <= n1 <= n2 <= n3 <= n4."""


class BudgetExceeded(SceneWalkError):
    """Requested computation exceeds the configured budget cap."""


class DegenerateVariance(SceneWalkError):
    """Sample variance is zero; scaling fits are undefined."""


class OrbitCapExceeded(SceneWalkError):
    """Requested orbit length exceeds the configured cap."""


class ConfigError(SceneWalkError):
    """Malformed experiment configuration."""
