import os
from typing import Optional
from dotenv import load_dotenv
import logging

load_dotenv()

logger = logging.getLogger(__name__)

class Config:
    """Lab configuration management"""

    # Output
    OUTPUT_DIR: str = os.getenv("STABLELAB_OUTPUT_DIR", "results")

    # Logging
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")
    LOG_FILE: Optional[str] = os.getenv("LOG_FILE", "stablelab.log") or None

    # Parallelism
    THREADS: int = int(os.getenv("STABLELAB_THREADS", "1"))
    CHUNK_SIZE: int = int(os.getenv("STABLELAB_CHUNK_SIZE", "2048"))

    # Censoring
    MAX_HORIZON_RETRIES: int = int(os.getenv("STABLELAB_MAX_HORIZON_RETRIES", "3"))
    MAX_CENSORED_FRACTION: float = float(os.getenv("STABLELAB_MAX_CENSORED_FRACTION", "0.01"))

    # Driver limits
    MAX_JUMP_THRESHOLD: float = float(os.getenv("STABLELAB_MAX_JUMP_THRESHOLD", "1e7"))

    # Tail events needed before a jump-exit fit is trusted
    MIN_TAIL_EVENTS: int = int(os.getenv("STABLELAB_MIN_TAIL_EVENTS", "50"))

    @classmethod
    def validate(cls) -> bool:
        """Validate configuration"""
        ok = True
        if cls.THREADS < 1:
            logger.error(f"STABLELAB_THREADS must be at least 1, got {cls.THREADS}")
            ok = False

        if cls.CHUNK_SIZE < 1:
            logger.error(f"STABLELAB_CHUNK_SIZE must be at least 1, got {cls.CHUNK_SIZE}")
            ok = False

        if not (0.0 <= cls.MAX_CENSORED_FRACTION < 1.0):
            logger.error("STABLELAB_MAX_CENSORED_FRACTION must lie in [0,1)")
            ok = False

        if cls.LOG_LEVEL.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            logger.warning(f"Unknown LOG_LEVEL {cls.LOG_LEVEL}, falling back to INFO")

        return ok

config = Config()
