"""
ABOUTME: Test package for the Koopman forecaster
ABOUTME: Contains unit tests per module, CLI runs and the slow Lorenz case study
"""
