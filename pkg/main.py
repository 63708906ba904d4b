#!/usr/bin/env python3
"""
ABOUTME: Entry point for the Koopman forecaster CLI
ABOUTME: Simple wrapper that imports and runs the modular CLI
"""

from koopman_forecaster.cli import main

if __name__ == "__main__":
    main()
