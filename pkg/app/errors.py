from typing import Any, Dict, List, Optional


class EngineError(Exception):
    """Базовая ошибка движка; exit_code уходит в CLI."""

    exit_code = 1


class ParseError(EngineError):
    exit_code = 2

    def __init__(self, message: str, position: Optional[int] = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class ValidationError(EngineError):
    exit_code = 3


class ConfigError(ValidationError):
    pass


class ComputationError(EngineError):
    exit_code = 4


class CapTooSmallError(ComputationError):
    """Результат зависит от отброшенных степеней: нужен больший cap."""


class CapEscalationError(ComputationError):
    pass


class SearchExhaustedError(ComputationError):
    pass


class IdentityError(ComputationError):
    """Точное тождество или неравенство не выполнилось."""

    def __init__(self, message: str, evidence: Optional[Dict[str, Any]] = None):
        self.evidence = evidence or {}
        super().__init__(message)


class VerificationError(EngineError):
    exit_code = 5

    def __init__(self, message: str, diffs: Optional[List[Dict[str, Any]]] = None):
        self.diffs = diffs or []
        super().__init__(message)
