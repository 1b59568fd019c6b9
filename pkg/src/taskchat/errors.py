"""Exception types shared across the platform."""


class TaskchatError(Exception):
    """Base class for all platform errors."""


class ParseError(TaskchatError):
    """Malformed frame-DSL text. Carries the byte offset of the failure."""

    def __init__(self, message, offset=None, dialogue_id=None, turn=None):
        self.offset = offset
        self.dialogue_id = dialogue_id
        self.turn = turn
        where = "" if offset is None else f" at offset {offset}"
        ctx = ""
        if dialogue_id is not None or turn is not None:
            ctx = f" (dialogue={dialogue_id!r}, turn={turn})"
        super().__init__(f"{message}{where}{ctx}")


class SchemaError(TaskchatError):
    """Domain schema violates an invariant. Names the offending field."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"schema field {field!r}: {message}")


class ValidationError(TaskchatError):
    """Dialog act refers to intents/slots unknown to the schema."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class KbFormatError(TaskchatError):
    """Knowledge-base document malformed. Carries the record index."""

    def __init__(self, message, record=None):
        self.record = record
        where = "" if record is None else f" (record {record})"
        super().__init__(f"{message}{where}")


class GoalError(TaskchatError):
    """User goal unusable for simulation (e.g. no request slots)."""


class EmptyGoalSet(TaskchatError):
    """Goal database empty; nothing to sample."""


class ProtocolError(TaskchatError):
    """Dialogue protocol violated (step after terminal state, invalid agent act)."""


class TrainingDiverged(TaskchatError):
    """Non-finite parameters encountered during a training update."""

    def __init__(self, message, last_good=None):
        self.last_good = last_good
        super().__init__(message)


class CheckpointError(TaskchatError):
    """Model checkpoint unreadable or incompatible with the schema."""


class EmptyReport(TaskchatError):
    """No metrics supplied to the report builder."""


class ServiceError(TaskchatError):
    """Dialogue-service level error with an HTTP-ish status code."""

    def __init__(self, code, status, message):
        self.code = code
        self.status = status
        super().__init__(message)
