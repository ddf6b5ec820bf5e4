#!/usr/bin/env python3
"""
Lab Settings

Environment-driven configuration shared by every freqlab module.
Values can be supplied through the process environment or a local .env file.
"""

import os

from dotenv import load_dotenv

load_dotenv()

# Numerics
PRECISION_BITS = int(os.getenv('FREQLAB_PRECISION_BITS', '128'))
MAX_PRECISION_BITS = int(os.getenv('FREQLAB_MAX_PRECISION_BITS', '4096'))

# Enumeration
ENUMERATION_BUDGET = int(os.getenv('FREQLAB_ENUMERATION_BUDGET', str(2 ** 26)))
MAX_K = int(os.getenv('FREQLAB_MAX_K', '64'))
SCAN_EXTRA_DEPTH = int(os.getenv('FREQLAB_SCAN_EXTRA_DEPTH', '6'))

# Runtime
LOG_LEVEL = os.getenv('FREQLAB_LOG_LEVEL', 'INFO')
LOG_FORMAT = os.getenv('FREQLAB_LOG_FORMAT', 'text')
DEFAULT_SEED = int(os.getenv('FREQLAB_DEFAULT_SEED', '0'))
SERVICE_NAME = 'freqlab'
