"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A parameter or option is outside its documented range."""


class DimensionError(ValueError):
    """An input has an incompatible or insufficient shape."""


class AsymmetricInputError(ValueError):
    """A matrix exceeds the symmetry tolerance.

    Carries the measured asymmetry magnitude in ``magnitude``.
    """

    def __init__(self, magnitude, tol):
        self.magnitude = float(magnitude)
        self.tol = float(tol)
        super().__init__(
            f"matrix is not symmetric: max |a_ij - a_ji| = {magnitude:.6e} "
            f"exceeds tolerance {tol:.1e}"
        )


class EigenConvergenceError(RuntimeError):
    """The eigensolver failed to converge within its iteration cap."""


class DegenerateSpectrumError(ValueError):
    """All eigenvalues are (numerically) equal; the Frobenius-optimal
    shrinkage target is undefined. Use the spectral target instead."""


class NotPositiveDefiniteError(ValueError):
    """A positive definite matrix was required but not supplied."""
