import logging
import logging.config
import os
import sys
from typing import Any, Dict, List, Optional

from colorama import just_fix_windows_console
from dotenv import load_dotenv


def build_logging_config(
    level: str = "INFO", log_file: Optional[str] = "cogpilot.log"
) -> Dict[str, Any]:
    handlers = ["console"]
    logging_config: Dict[str, Any] = {
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {
            "standard": {
                "format": "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
            },
        },
        "handlers": {
            "console": {
                "class": "logging.StreamHandler",
                "level": level,
                "formatter": "standard",
                "stream": "ext://sys.stdout"
            },
        },
        "loggers": {
            "": {  # root logger
                "handlers": handlers,
                "level": level,
                "propagate": True
            },
            "app": {
                "handlers": handlers,
                "level": level,
                "propagate": False
            },
        }
    }
    if log_file:
        logging_config["handlers"]["file"] = {
            "class": "logging.handlers.RotatingFileHandler",
            "level": level,
            "formatter": "standard",
            "filename": log_file,
            "maxBytes": 10485760,  # 10MB
            "backupCount": 5,
            "encoding": "utf8"
        }
        handlers.append("file")
    return logging_config


def configure_logging() -> None:
    level = os.getenv("LOG_LEVEL", "INFO").upper()
    log_file = os.getenv("LOG_FILE", "cogpilot.log")
    logging.config.dictConfig(build_logging_config(level, log_file or None))


def main(argv: Optional[List[str]] = None) -> int:
    # Load environment variables
    load_dotenv()
    configure_logging()
    just_fix_windows_console()

    # the run ledger reads DATABASE_URL at import
    from app.api import cli

    logger = logging.getLogger(__name__)
    logger.debug(f"Default workers: {os.getenv('COGPILOT_WORKERS', '1')}")
    return cli.main(argv)


if __name__ == "__main__":
    sys.exit(main())
