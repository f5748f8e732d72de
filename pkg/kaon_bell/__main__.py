#!/usr/bin/env python3
"""
kaon-bell - __main__ module
Allows running the command-line driver with: python -m kaon_bell
"""

import sys

from kaon_bell.cli import main

if __name__ == "__main__":
    sys.exit(main())
