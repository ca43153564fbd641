"""Exception types raised by the kernel, the quadrature engine and the CLI."""


class BiEnergyError(Exception):
    """Base class for all errors raised by this package."""


class DomainViolation(BiEnergyError, ValueError):
    """A point lies outside a map's domain or on its singular set."""


class FDUnstable(BiEnergyError, ArithmeticError):
    """Finite differences failed the Richardson stability check."""


class OrientationViolation(BiEnergyError, ArithmeticError):
    """A Jacobian determinant came out negative."""


class MaxDepthExceeded(BiEnergyError, ArithmeticError):
    """Adaptive quadrature ran out of subdivision depth or cell budget."""


class NonFiniteIntegrand(BiEnergyError, ArithmeticError):
    """An integrand returned NaN or infinity at a quadrature node."""


class InsufficientShells(BiEnergyError, ValueError):
    """Too few resolved shells to fit a decay exponent."""


class ScaleOutOfDomain(BiEnergyError, ValueError):
    """A requested ball does not fit inside the domain."""


class ConfigError(BiEnergyError, ValueError):
    """An experiment configuration is malformed."""
