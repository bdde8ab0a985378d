"""
Logging Service
Provides structured logging functionality for the topic mining pipeline
"""
import logging
import os
from datetime import datetime
from typing import Dict, Any, Optional


LOGGER_NAME = 'topic-miner'


class Logger:
    def __init__(self, log_dir: Optional[str] = None, log_level: str = 'INFO'):
        """
        Initialize logger

        Args:
            log_dir: Directory to store log files (None logs to the console only)
            log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        """
        self.log_dir = log_dir
        self.log_level = getattr(logging, log_level.upper(), logging.INFO)

        self.logger = logging.getLogger(LOGGER_NAME)
        self.logger.setLevel(self.log_level)

        # Clear existing handlers
        self.logger.handlers.clear()

        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )

        if log_dir:
            if not os.path.exists(log_dir):
                os.makedirs(log_dir)

            # One file per day
            log_filename = os.path.join(
                log_dir,
                f"pipeline_{datetime.now().strftime('%Y%m%d')}.log"
            )
            file_handler = logging.FileHandler(log_filename, encoding='utf-8')
            file_handler.setLevel(self.log_level)
            file_handler.setFormatter(formatter)
            self.logger.addHandler(file_handler)

        console_handler = logging.StreamHandler()
        console_handler.setLevel(self.log_level)
        console_handler.setFormatter(formatter)
        self.logger.addHandler(console_handler)

    @staticmethod
    def _render(message: str, kwargs: Dict[str, Any]) -> str:
        extra_info = ' | '.join([f"{k}={v}" for k, v in kwargs.items()]) if kwargs else ''
        return f"{message} {extra_info}" if extra_info else message

    def info(self, message: str, **kwargs):
        """Log info message"""
        self.logger.info(self._render(message, kwargs))

    def debug(self, message: str, **kwargs):
        """Log debug message"""
        self.logger.debug(self._render(message, kwargs))

    def warning(self, message: str, **kwargs):
        """Log warning message"""
        self.logger.warning(self._render(message, kwargs))

    def error(self, message: str, **kwargs):
        """Log error message"""
        self.logger.error(self._render(message, kwargs))

    def critical(self, message: str, **kwargs):
        """Log critical message"""
        self.logger.critical(self._render(message, kwargs))

    def log_pipeline_start(self, subcommand: str, seed: int):
        """Log pipeline start"""
        self.info("=" * 60)
        self.info("PIPELINE STARTED", subcommand=subcommand, seed=seed)
        self.info("=" * 60)

    def log_pipeline_complete(self, subcommand: str, result: Dict[str, Any]):
        """Log pipeline completion"""
        self.info("=" * 60)
        self.info("PIPELINE COMPLETED",
                  subcommand=subcommand,
                  stages=','.join(result.get('stages', [])),
                  artifacts=len(result.get('artifacts', [])))
        self.info("=" * 60)

    def log_pipeline_error(self, subcommand: str, error: Exception):
        """Log pipeline error"""
        self.error("PIPELINE FAILED",
                   subcommand=subcommand,
                   error=str(error))

    def log_step(self, step_name: str, status: str = 'started', **kwargs):
        """Log pipeline step"""
        if status == 'started':
            self.info(f"[{step_name}] Started", **kwargs)
        elif status == 'completed':
            self.info(f"[{step_name}] Completed", **kwargs)
        elif status == 'failed':
            self.error(f"[{step_name}] Failed", **kwargs)
        elif status == 'skipped':
            self.warning(f"[{step_name}] Skipped", **kwargs)


_shared_logger: Optional[Logger] = None


def get_logger() -> Logger:
    """Return the shared pipeline logger, creating a console-only one on first use"""
    global _shared_logger
    if _shared_logger is None:
        _shared_logger = Logger(log_dir=None, log_level=os.getenv('LOG_LEVEL', 'INFO'))
    return _shared_logger


def configure_logging(log_dir: Optional[str] = 'logs', log_level: str = 'INFO') -> Logger:
    """Replace the shared logger, adding a daily log file under log_dir"""
    global _shared_logger
    _shared_logger = Logger(log_dir=log_dir, log_level=log_level)
    return _shared_logger
