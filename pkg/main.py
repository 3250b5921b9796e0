#!/usr/bin/env python3
"""
CamFit
Main entry point for the camera geometry and extrinsic fitting tools
"""

import sys
import os

# Make the 'src' package importable when run from any directory
sys.path.insert(0, os.path.abspath(os.path.dirname(__file__)))

from src.cli.app import main

if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
