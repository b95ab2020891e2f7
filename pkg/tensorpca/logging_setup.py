from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

from .config import get_settings


def configure_logging(log_dir: Optional[Path] = None, level: int = logging.INFO) -> Optional[Path]:
    """Dedicated file + console logging; returns the log file path if the file handler was created."""
    logger = logging.getLogger()
    logger.setLevel(level)
    # Replace handlers to avoid duplicates
    logger.handlers = []
    sh = logging.StreamHandler()
    sh.setLevel(level)
    sh.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    logger.addHandler(sh)
    log_dir = log_dir or get_settings().log_dir
    try:
        log_dir.mkdir(parents=True, exist_ok=True)
        log_file = log_dir / "tensorpca.log"
        fh = logging.FileHandler(log_file, mode="a", encoding="utf-8")
    except OSError:
        logging.warning("[startup] Cannot write logs to %s; console only", log_dir)
        return None
    fh.setLevel(level)
    fh.setFormatter(logging.Formatter("%(asctime)s %(levelname)s: %(message)s"))
    logger.addHandler(fh)
    logging.info("[startup] Logger initialized; writing to %s", log_file)
    return log_file
