"""Exception hierarchy.

InputError maps to CLI exit code 2, NumericalError and its subclasses to
exit code 3. Everything raised on purpose by this package derives from
DipoleSpecError.
"""


class DipoleSpecError(Exception):
    pass


class InputError(DipoleSpecError):
    """Bad arguments, violated preconditions, malformed potential specs."""


class NumericalError(DipoleSpecError):
    """A computation failed in a way declared by the operation contract."""


class ResolutionError(NumericalError):
    """The requested quantity is not resolvable on the given grid."""


class EigenSolveError(NumericalError):
    """Eigensolver did not converge within its documented iteration cap."""


class IndefiniteFormError(NumericalError):
    """The discretized denominator form lost positive definiteness."""


class BracketError(NumericalError):
    """Root bracketing failed after geometric expansion of the interval."""


class NonContractionError(NumericalError):
    """Fixed-point iteration stopped contracting; reduce the outer radius."""


class DivergentIntegralError(NumericalError):
    """A singular integrand is not absolutely integrable at this resolution."""
