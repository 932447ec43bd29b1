"""
Logging utilities for the PRUW simulator.
Provides verbose debugging capabilities and configurable log levels.
"""

import logging
import sys
from typing import Optional

import yaml


class SimulatorLogger:
    """Custom logger for the simulator with verbose debugging capabilities."""

    def __init__(self, config_path: Optional[str] = "config.yaml", verbose: bool = False,
                 logging_config: Optional[dict] = None):
        """
        Initialize the logger with configuration.

        Args:
            config_path: Path to the configuration file
            verbose: Enable verbose logging regardless of config
            logging_config: Already-parsed `logging` section; skips reading the file
        """
        if logging_config is not None:
            self.config = {'logging': logging_config}
        else:
            self.config = self._load_config(config_path)
        self.verbose = verbose or self.config.get('logging', {}).get('verbose', False)
        self.logger = self._setup_logger()

    def _load_config(self, config_path: Optional[str]) -> dict:
        """Load configuration from YAML file."""
        if not config_path:
            return {}
        try:
            with open(config_path, 'r') as f:
                return yaml.safe_load(f) or {}
        except FileNotFoundError:
            print(f"Warning: Config file {config_path} not found. Using defaults.")
            return {}
        except yaml.YAMLError as e:
            print(f"Error parsing config file: {e}")
            return {}

    def _setup_logger(self) -> logging.Logger:
        """Set up the logger with appropriate handlers and formatters."""
        logger = logging.getLogger('pruw_simulator')

        # Clear any existing handlers
        logger.handlers.clear()

        log_level = self.config.get('logging', {}).get('level', 'INFO')
        if self.verbose:
            log_level = 'DEBUG'

        logger.setLevel(getattr(logging, str(log_level).upper()))

        verbose_formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(funcName)s:%(lineno)d - %(message)s'
        )
        simple_formatter = logging.Formatter(
            '%(asctime)s - %(levelname)s - %(message)s'
        )

        console_handler = logging.StreamHandler(sys.stdout)
        console_handler.setLevel(logging.INFO)
        console_handler.setFormatter(simple_formatter)
        logger.addHandler(console_handler)

        # An empty log_file disables file logging.
        log_file = self.config.get('logging', {}).get('log_file', 'pruw_simulator.log')
        if log_file:
            file_handler = logging.FileHandler(log_file)
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(verbose_formatter)
            logger.addHandler(file_handler)

        if self.verbose:
            debug_handler = logging.StreamHandler(sys.stdout)
            debug_handler.setLevel(logging.DEBUG)
            debug_handler.addFilter(lambda record: record.levelno < logging.INFO)
            debug_handler.setFormatter(verbose_formatter)
            logger.addHandler(debug_handler)

        return logger

    def debug(self, message: str):
        self.logger.debug(message)

    def info(self, message: str):
        self.logger.info(message)

    def warning(self, message: str):
        self.logger.warning(message)

    def error(self, message: str):
        self.logger.error(message)

    def critical(self, message: str):
        self.logger.critical(message)

    def log_message(self, record):
        """Log one transcript record."""
        self.debug(
            f"R{record.round} {record.phase}: {record.sender} -> {record.receiver} "
            f"{record.kind} ({record.symbol_count} symbols)"
        )

    def log_round_progress(self, report):
        """Log a closed round."""
        status = "[OK]" if report.reads_correct else "[ERROR]"
        self.info(
            f"{status} Round {report.round}: {len(report.readers)} readers downloaded "
            f"{len(report.v_tilde_read)} subpackets, {len(report.writers)} writers; "
            f"next V~ has {len(report.next_v_tilde)} entries"
        )

    def log_audit_result(self, test):
        """Log one audit test outcome."""
        verdict = "held" if test.passed else "violated"
        message = (
            f"{test.audit}/{test.name} [{test.mode}, {test.control}]: property {verdict} "
            f"(statistic={test.statistic:.4g}, threshold={test.threshold:.4g})"
        )
        if test.ok:
            self.debug(f"[OK] {message}")
        else:
            self.error(f"[ERROR] {message}")

    def log_file_operation(self, operation: str, file_path: str, success: bool):
        """Log file operation results."""
        if success:
            self.debug(f"[OK] {operation}: {file_path}")
        else:
            self.error(f"[ERROR] {operation}: {file_path}")


def get_logger(config_path: Optional[str] = "config.yaml", verbose: bool = False,
               logging_config: Optional[dict] = None) -> SimulatorLogger:
    """
    Get a configured logger instance.

    Args:
        config_path: Path to the configuration file
        verbose: Enable verbose logging
        logging_config: Parsed `logging` section, used instead of reading config_path

    Returns:
        Configured SimulatorLogger instance
    """
    return SimulatorLogger(config_path, verbose, logging_config)
