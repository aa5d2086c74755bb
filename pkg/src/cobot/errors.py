"""Exception hierarchy shared across the simulator.

Every error carries a short machine-parseable ``code`` so the CLI can print
a stable one-line identifier before the human-readable text.
"""


class CobotError(Exception):
    code = "error"

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class MalformedFrame(CobotError):
    code = "malformed_frame"


class UnsupportedGesture(CobotError):
    code = "unsupported_gesture"


class DegenerateConfiguration(CobotError):
    code = "degenerate_configuration"


class PointAtInfinity(CobotError):
    code = "point_at_infinity"


class JointLimitViolation(CobotError):
    code = "joint_limit_violation"


class NoConvergence(CobotError):
    code = "no_convergence"


class Unreachable(CobotError):
    code = "unreachable"


class IncompleteDesign(CobotError):
    code = "incomplete_design"


class DegenerateInput(CobotError):
    code = "degenerate_input"


class ParameterError(CobotError):
    code = "parameter_error"


class ValidationError(CobotError):
    code = "validation_error"


class TopicError(CobotError):
    code = "invalid_topic"


class LogCorruption(CobotError):
    code = "log_corruption"


class ConfigMismatch(CobotError):
    code = "config_mismatch"


class ScenarioError(CobotError):
    code = "scenario_error"
