"""
Services package - Fields, cones, series, oracles and CLI support services
"""
