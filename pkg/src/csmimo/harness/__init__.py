"""Scenario configs, Monte Carlo runner, result files and the command line."""
