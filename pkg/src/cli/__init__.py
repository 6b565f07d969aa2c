"""
CLI package - Command-line front end (`mdz`)
"""
