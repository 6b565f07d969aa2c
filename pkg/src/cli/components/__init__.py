"""
CLI components - Output rendering and verification suites
"""
