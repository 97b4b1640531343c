"""Numerical core: topology, channels, metrics, mode selection, power control, oracle and harness"""
