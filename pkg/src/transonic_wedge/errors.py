"""Exception hierarchy shared by all solver stages.

Every error carries an ``exit_code`` used by the command line front end:
2 for configuration problems, 3 for violated physical preconditions and
4 for numerical divergence.
"""


class TransonicError(Exception):
    exit_code = 3


# -- configuration -------------------------------------------------------

class ConfigError(TransonicError):
    exit_code = 2


class EmptySweep(ConfigError):
    pass


# -- physical preconditions ---------------------------------------------

class PhysicsError(TransonicError):
    exit_code = 3


class NotSupersonic(PhysicsError):
    pass


class NearSonic(PhysicsError):
    pass


class Detached(PhysicsError):
    pass


class NotSubsonic(PhysicsError):
    pass


class NoSubsonicRoot(PhysicsError):
    pass


class Stagnation(PhysicsError):
    pass


class SonicDegeneracy(PhysicsError):
    pass


class ParallelJump(PhysicsError):
    pass


class DegeneratePoint(PhysicsError):
    pass


class TransformDegenerate(PhysicsError):
    pass


class EllipticityLost(PhysicsError):
    pass


class ObliquenessLost(PhysicsError):
    pass


class JacobianDegenerate(PhysicsError):
    pass


class BadExponents(PhysicsError):
    pass


class PreconditionViolated(PhysicsError):
    pass


class InsufficientAnnuli(PhysicsError):
    pass


# -- numerical failure ---------------------------------------------------

class DivergenceError(TransonicError):
    exit_code = 4


class RootBracketFail(DivergenceError):
    pass


class SolverDiverged(DivergenceError):
    pass


class LeftDeltaBall(DivergenceError):
    pass


class MaxIterations(DivergenceError):
    pass


class OuterDiverged(DivergenceError):
    pass
