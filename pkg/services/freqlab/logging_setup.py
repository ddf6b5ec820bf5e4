#!/usr/bin/env python3
"""
Logging Setup

Configures the root logger for the freqlab command line, either with the
classic text format or as one JSON object per line.
"""

import logging
import sys
from typing import Optional

import orjson

import settings

TEXT_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


class JsonLogFormatter(logging.Formatter):
    """Render log records as single-line JSON"""

    def format(self, record: logging.LogRecord) -> str:
        payload = {
            'ts': self.formatTime(record),
            'level': record.levelname,
            'service': settings.SERVICE_NAME,
            'logger': record.name,
            'msg': record.getMessage(),
        }
        if record.exc_info:
            payload['exc'] = self.formatException(record.exc_info)
        return orjson.dumps(payload).decode()


def configure_logging(level: Optional[str] = None, fmt: Optional[str] = None) -> None:
    """Install a single stderr handler on the root logger"""
    level = (level or settings.LOG_LEVEL).upper()
    fmt = (fmt or settings.LOG_FORMAT).lower()

    handler = logging.StreamHandler(sys.stderr)
    if fmt == 'json':
        handler.setFormatter(JsonLogFormatter())
    else:
        handler.setFormatter(logging.Formatter(TEXT_FORMAT))

    root = logging.getLogger()
    for existing in list(root.handlers):
        root.removeHandler(existing)
    root.addHandler(handler)
    root.setLevel(getattr(logging, level, logging.INFO))
