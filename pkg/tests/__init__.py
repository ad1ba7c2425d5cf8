"""
Test suite for the rcvf kernel.
"""
