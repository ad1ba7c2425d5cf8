"""
Unit tests for the exact algorithms.
"""
