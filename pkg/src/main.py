"""
mdz - Multiple Dedekind zeta values

Main entry point for the command-line application.
"""

import sys
import os

# Add src to path for imports
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from cli.app import MdzApp


def main():
    """Application entry point."""
    sys.exit(MdzApp().run(sys.argv[1:]))


if __name__ == "__main__":
    main()
