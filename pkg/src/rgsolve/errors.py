"""Exception hierarchy shared by all modules.

The CLI maps these onto its exit-code contract: document/input problems
exit 2, validation problems exit 3, convergence and singular-point
problems exit 4.
"""


class RGSolveError(Exception):
    """Base class for all library errors."""


class DocumentError(RGSolveError):
    """Malformed or unreadable model/state document.

    Carries enough context (field name, index) to locate the problem.
    """


class ValidationError(RGSolveError):
    """Input violates a documented invariant (bad model, N > L, ...)."""


class PoleError(ValidationError):
    """A value coincides with a level epsilon_i (or another forbidden pole)."""


class CollisionError(ValidationError):
    """Two values of a set coincide within the collision tolerance."""


class ConvergenceError(RGSolveError):
    """Newton iteration or homotopy continuation failed to converge."""

    def __init__(self, message, seed_occupation=None, last_g=None):
        super().__init__(message)
        self.seed_occupation = seed_occupation
        self.last_g = last_g


class SingularPointError(RGSolveError):
    """Hyperbolic coupling sits on a Read-Green point (integer 1/g).

    Dual rapidities diverge or collapse there; the offending integer is
    reported instead of attempting the coinciding-rapidity limit.
    """

    def __init__(self, message, integer=None):
        super().__init__(message)
        self.integer = integer
