"""
Error Handling Utilities for the finger force-direction simulator
Provides the exception hierarchy, user-friendly messages and CLI exit codes
"""

import itertools
import logging
import os
from typing import Any, Dict, List, Optional

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_BLOWUP = 2


class FingerForceError(Exception):
    """Base exception for every domain error"""
    def __init__(self, message: str, error_type: str = "FINGERFORCE_ERROR", details: Dict[str, Any] = None):
        self.message = message
        self.error_type = error_type
        self.details = details or {}
        super().__init__(self.message)


class DimensionMismatch(FingerForceError):
    """Array length or shape does not match the chain / layout / model"""
    def __init__(self, message: str, expected: Any = None, got: Any = None):
        super().__init__(message, "DIMENSION_MISMATCH", {
            "expected": expected,
            "got": got
        })


class DegenerateForce(FingerForceError):
    """Force vector too small to define a direction"""
    def __init__(self, message: str, norm: float = None, eps: float = None):
        super().__init__(message, "DEGENERATE_FORCE", {
            "norm": norm,
            "eps": eps
        })


class NoContact(FingerForceError):
    """Tactile activation below the contact threshold"""
    def __init__(self, message: str, delta: float = None, threshold: float = None):
        super().__init__(message, "NO_CONTACT", {
            "delta": delta,
            "threshold": threshold
        })


class WindowTooShort(FingerForceError):
    """Feature window shorter than the configured length"""
    def __init__(self, message: str, required: int = None, got: int = None):
        super().__init__(message, "WINDOW_TOO_SHORT", {
            "required": required,
            "got": got
        })


class DegenerateDataset(FingerForceError):
    """Training data with a single class"""
    def __init__(self, message: str, classes: List[int] = None):
        super().__init__(message, "DEGENERATE_DATASET", {
            "classes": classes or []
        })


class EmptyDataset(FingerForceError):
    """No window qualified for the dataset"""
    def __init__(self, message: str, runs: int = None):
        super().__init__(message, "EMPTY_DATASET", {
            "runs": runs
        })


class NumericalBlowup(FingerForceError):
    """Joint velocity exceeded the configured bound"""
    def __init__(self, message: str, time: float = None, tick: int = None, qdot_norm: float = None):
        super().__init__(message, "NUMERICAL_BLOWUP", {
            "time": time,
            "tick": tick,
            "qdot_norm": qdot_norm
        })


class ConfigError(FingerForceError):
    """Invalid or missing configuration file / field"""
    def __init__(self, message: str, path: str = None, line: int = None, field: str = None):
        super().__init__(message, "CONFIG_ERROR", {
            "path": path,
            "line": line,
            "field": field
        })


class MalformedLog(FingerForceError):
    """RunLog that cannot be verified"""
    def __init__(self, message: str, path: str = None, missing: List[str] = None):
        super().__init__(message, "MALFORMED_LOG", {
            "path": path,
            "missing": missing or []
        })


class ErrorHandler:
    """Centralized error handling and logging"""

    def __init__(self):
        self._ids = itertools.count(1)

    def log_error(self, error: Exception, context: Dict[str, Any] = None) -> str:
        """Log an error with its context and return an ID that the caller can print"""
        error_id = f"ERR_{os.getpid()}_{next(self._ids):04d}"
        logger.error("%s %s: %s %s", error_id, type(error).__name__, self.get_user_friendly_message(error),
                     context or {})
        return error_id

    def get_user_friendly_message(self, error: Exception) -> str:
        """Convert technical errors to user-friendly messages"""
        if isinstance(error, ConfigError):
            path = error.details.get('path')
            line = error.details.get('line')
            where = path or 'configuration'
            if line is not None:
                where = f"{where}:{line}"
            return f"Config error in {where}: {error.message}"

        elif isinstance(error, NumericalBlowup):
            tick = error.details.get('tick')
            t = error.details.get('time')
            at = f" at tick {tick}" if tick is not None else ""
            if t is not None:
                at += f" (t={t:.4f} s)"
            return f"Simulation diverged{at}: {error.message}"

        elif isinstance(error, MalformedLog):
            missing = error.details.get('missing') or []
            suffix = f" (missing: {', '.join(missing)})" if missing else ""
            return f"Malformed run log: {error.message}{suffix}"

        elif isinstance(error, (DegenerateDataset, EmptyDataset)):
            return f"Dataset error: {error.message}"

        elif isinstance(error, FingerForceError):
            return f"{error.error_type}: {error.message}"

        else:
            return f"Unexpected error: {str(error)}"

    def get_error_suggestions(self, error: Exception) -> list:
        """Get suggested actions for common errors"""
        suggestions = []

        if isinstance(error, NumericalBlowup):
            suggestions.extend([
                "Lower K_theta or K_p in the scenario gains",
                "Reduce the physics step (raise physics_rate)",
                "Lower contact stiffness k_c"
            ])
        elif isinstance(error, ConfigError):
            suggestions.extend([
                "Check relative paths against FINGERFORCE_CONFIG_PATH",
                "See configs/README.md for the file schemas"
            ])
        elif isinstance(error, DegenerateDataset):
            suggestions.append("Add low-friction scenarios so unstable windows are present")

        return suggestions

    def exit_code(self, error: Optional[Exception]) -> int:
        if error is None:
            return EXIT_OK
        if isinstance(error, NumericalBlowup):
            return EXIT_BLOWUP
        return EXIT_FAILURE


# Global error handler instance
error_handler = ErrorHandler()


def safe_execute(func, *args, **kwargs):
    """Run a CLI command, converting domain errors into an exit code and a message"""
    try:
        return {"success": True, "result": func(*args, **kwargs), "exit_code": EXIT_OK}
    except FingerForceError as e:
        error_id = error_handler.log_error(e, {
            "function": func.__name__,
            "args": str(args)[:100],
            "kwargs": str(kwargs)[:100]
        })
        return {
            "success": False,
            "error": error_handler.get_user_friendly_message(e),
            "error_id": error_id,
            "suggestions": error_handler.get_error_suggestions(e),
            "exit_code": error_handler.exit_code(e)
        }
