"""
Utils package - Numerical helpers shared by the services
"""
