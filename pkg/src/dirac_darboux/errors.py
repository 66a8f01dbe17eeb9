"""Exception hierarchy shared by all modules."""


class DiracDarbouxError(Exception):
    """Base class for every error raised by the package."""


class NumericalError(DiracDarbouxError):
    """A computation could not produce a finite, well-conditioned result."""


class OutOfDomain(DiracDarbouxError):
    """A sampled potential was queried outside its grid."""


class BadGrid(DiracDarbouxError):
    """Step size or interval does not define a uniform grid."""


class GridMismatch(DiracDarbouxError):
    """Two series that must share a grid do not."""


class ZeroState(DiracDarbouxError):
    """A spinor with zero norm was fed to a population observable."""


class DegenerateEigenvalues(DiracDarbouxError):
    """The two seed eigenvalues coincide."""


class SingularSeed(NumericalError):
    """The seed matrix u(t) is (numerically) singular somewhere on the grid."""

    def __init__(self, t_star, det_value, guard):
        self.t_star = float(t_star)
        self.det_value = float(det_value)
        self.guard = float(guard)
        super().__init__(
            f"singular seed: |det u| = {self.det_value:.3e} <= guard {self.guard:.3e} "
            f"at t* = {self.t_star:.9f}"
        )


class NonFiniteState(NumericalError):
    """Integration overflowed or produced NaN."""


class TooShort(DiracDarbouxError):
    """Series too short for the requested statistic."""


class BadConfig(DiracDarbouxError):
    """A configuration object violates its invariants."""


class BadBounds(BadConfig):
    """Search bounds are not positive and ordered."""


class NonHermitian(NumericalError):
    """A potential required to be Hermitian is not."""


class NotUnitary(NumericalError):
    """A matrix required to be unitary is not."""


class SeedEigenvalueCollision(UserWarning):
    """Trajectory eigenvalue coincides with a seed eigenvalue; L Psi may vanish."""
