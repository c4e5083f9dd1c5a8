"""Exception hierarchy shared by every layer.

Each error carries a short ``code`` so the HTTP layer can map it to a status
without string matching.
"""


class ZkProvdError(Exception):
    code = "error"


class FieldConfigError(ZkProvdError):
    code = "field-config"


class FieldDivisionByZero(ZkProvdError, ZeroDivisionError):
    code = "division-by-zero"


class EncodingSyntaxError(ZkProvdError):
    """Bytes could not be parsed into the expected document shape."""

    code = "syntax"


class InvariantViolation(ZkProvdError):
    """A document parsed but breaks a structural invariant."""

    code = "invariant-violation"


class MalformedCircuitError(InvariantViolation):
    code = "malformed-circuit"


class MalformedWitnessError(ZkProvdError):
    code = "malformed-witness"


class UnsatisfiableInputError(ZkProvdError):
    code = "unsatisfiable-input"

    def __init__(self, instruction_index: int, message: str = ""):
        self.instruction_index = instruction_index
        super().__init__(message or f"assertion failed at instruction {instruction_index}")


class BadRequestError(ZkProvdError):
    code = "bad-request"


class ParameterError(ZkProvdError, ValueError):
    code = "parameter"


class InternalConsistencyError(ZkProvdError):
    code = "internal-consistency"


class NotFoundError(ZkProvdError, KeyError):
    code = "not-found"

    def __str__(self):
        return Exception.__str__(self)


class ConflictError(ZkProvdError):
    code = "conflict"


class StorageError(ZkProvdError):
    code = "storage"


class OverloadedError(ZkProvdError):
    code = "overloaded"
