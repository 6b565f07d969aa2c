"""
mdz - Multiple Dedekind zeta values
"""

__version__ = "1.0.0"
__author__ = "mdz"
