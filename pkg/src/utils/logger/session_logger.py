import logging
import pathlib
import os
from typing import List, Optional
from dotenv import load_dotenv
import threading

load_dotenv(override=True)

LOG_LEVELS = {
    "debug": {
        "log_level": logging.DEBUG,
        "color": "\033[90m"  # Grey
    },
    "info": {
        "log_level": logging.INFO,
        "color": "\033[37m"  # White
    },
    "warning": {
        "log_level": logging.WARNING,
        "color": "\033[95m"  # Pink
    },
    "error": {
        "log_level": logging.ERROR,
        "color": "\033[91m"  # Red
    }
}

# Used when no experiment session is active (library calls, tests)
_fallback_logger = logging.getLogger("mfsim")


class SessionLogger:
    """Execution logger of one experiment run.

    Log files live under ``LOGS_DIR/<run_id>/execution_logs/<kind>/``. Worker
    threads write through per-file locks so lines never interleave.
    """
    _file_locks = {}
    _locks_lock = threading.Lock()
    _current_logger = None

    @classmethod
    def log_to_file(cls, file_name: str, message: str, log_level: str = "info") -> None:
        """
        Logs a message to a specific file within the run's execution_logs directory.

        Args:
            file_name: Name of the log file (without .log extension)
            message: Message to log
            log_level: One of "debug", "info", "warning", "error"
        """
        current_logger = cls.get_current_logger()
        if not current_logger:
            _fallback_logger.log(LOG_LEVELS[log_level]["log_level"],
                                 "%s: %s", file_name, message)
            return

        logger_id = f"mfsim_{current_logger.run_id}_{current_logger.kind}_{file_name}"
        file_logger = logging.getLogger(logger_id)
        file_logger.propagate = False

        log_dir = current_logger.log_dir / "execution_logs" / current_logger.kind
        log_dir.mkdir(parents=True, exist_ok=True)
        log_file = log_dir / f"{file_name}.log"

        if not file_logger.handlers:
            file_logger.setLevel(current_logger.log_level)

            file_handler = logging.FileHandler(log_file)
            formatter = logging.Formatter('%(asctime)s - %(levelname)s - %(message)s')
            file_handler.setFormatter(formatter)
            file_logger.addHandler(file_handler)

        # Get or create lock for this file
        if log_file not in cls._file_locks:
            with cls._locks_lock:
                file_lock = cls._file_locks.get(log_file)
                if file_lock is None:
                    file_lock = threading.Lock()
                    cls._file_locks[log_file] = file_lock
        else:
            file_lock = cls._file_locks[log_file]

        with file_lock:
            file_logger.log(LOG_LEVELS[log_level]["log_level"], message)
            if current_logger.console_output_files \
                    and file_name in current_logger.console_output_files \
                    and LOG_LEVELS[log_level]["log_level"] >= current_logger.log_level:
                color = LOG_LEVELS[log_level]["color"]
                reset = "\033[0m"
                print(f"{color}{message}{reset}")

    @classmethod
    def get_current_logger(cls) -> Optional["SessionLogger"]:
        return cls._current_logger

    @classmethod
    def close(cls) -> None:
        """Detach the current logger and release its file handles."""
        current_logger = cls._current_logger
        if current_logger is None:
            return
        prefix = f"mfsim_{current_logger.run_id}_{current_logger.kind}_"
        for name in list(logging.root.manager.loggerDict):
            if name.startswith(prefix):
                for handler in list(logging.getLogger(name).handlers):
                    handler.close()
                    logging.getLogger(name).removeHandler(handler)
        cls._current_logger = None

    def __init__(self, run_id: str, kind: str, log_level=logging.INFO,
                 console_output_files: List[str] = None,
                 logs_dir: Optional[str] = None):
        self.run_id = run_id
        self.kind = kind
        self.log_level = log_level
        self.log_dir = pathlib.Path(logs_dir or os.getenv("LOGS_DIR", "logs")) / run_id
        self.console_output_files = console_output_files

        # Store this instance as the current logger
        SessionLogger._current_logger = self


def setup_logger(
    run_id: str,
    kind: str,
    log_level: int = logging.INFO,
    console_output_files: Optional[List[str]] = None,
    logs_dir: Optional[str] = None
) -> SessionLogger:
    """Setup the logger of a new experiment run.

    Args:
        run_id: Run identifier (derived from the config digest)
        kind: Experiment kind, used as log subdirectory
        log_level: Logging level (default: logging.INFO)
        console_output_files: List of file names to echo to console
        logs_dir: Override of the LOGS_DIR environment variable
    """
    return SessionLogger(
        run_id=run_id,
        kind=kind,
        log_level=log_level,
        console_output_files=console_output_files,
        logs_dir=logs_dir
    )
