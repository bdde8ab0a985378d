"""
Pipeline exceptions
Each exception carries the CLI exit code it maps to
"""
from typing import Any, Dict, Optional


class TopicMinerError(Exception):
    exit_code = 1


class ConfigError(TopicMinerError):
    """Invalid option, flag combination, or unknown format"""
    exit_code = 2


class DataError(TopicMinerError):
    """Input data that cannot be used"""
    exit_code = 3


class ParseError(DataError):
    def __init__(self, line: int, field: str, message: str):
        self.line = line
        self.field = field
        super().__init__(f"Malformed row at line {line}: field '{field}' {message}")


class MissingArtifactError(DataError):
    def __init__(self, artifact: str, stage: str):
        self.artifact = artifact
        self.stage = stage
        super().__init__(f"Missing artifact '{artifact}': run `{stage}` first")


class NumericalError(TopicMinerError):
    exit_code = 4

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        self.diagnostics = diagnostics or {}
        if self.diagnostics:
            dump = ' | '.join(f"{k}={v}" for k, v in self.diagnostics.items())
            message = f"{message} [{dump}]"
        super().__init__(message)
