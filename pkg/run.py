#!/usr/bin/env python3
"""Command-line entry point."""

import sys

from spdcfocus.cli import main

if __name__ == '__main__':
    sys.exit(main())
