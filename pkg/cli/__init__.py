"""
Command line package.
"""
