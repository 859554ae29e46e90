"""
Process entry point
Configures logging, then hands off to the click command group
"""

import json
import logging
import sys

from cli import cli
from config import LOG_JSON, LOG_LEVEL


class JsonLineFormatter(logging.Formatter):
    """One JSON object per log record"""
    def format(self, record):
        log_obj = {
            "severity": record.levelname,
            "message": record.getMessage(),
            "timestamp": self.formatTime(record, self.datefmt),
            "logger": record.name,
        }
        if record.exc_info:
            log_obj["exception"] = self.formatException(record.exc_info)
        return json.dumps(log_obj, ensure_ascii=False)


def configure_logging(json_lines: bool = LOG_JSON, level: str = LOG_LEVEL) -> None:
    # Logs go to stderr; stdout stays free for data
    handler = logging.StreamHandler(sys.stderr)
    if json_lines:
        handler.setFormatter(JsonLineFormatter())
    else:
        handler.setFormatter(logging.Formatter(
            '%(asctime)s | %(levelname)-8s | %(name)-25s | %(message)s',
            datefmt='%H:%M:%S'
        ))
    logging.basicConfig(level=level, handlers=[handler], force=True)


def main():
    configure_logging()
    cli(obj={})


if __name__ == "__main__":
    main()
