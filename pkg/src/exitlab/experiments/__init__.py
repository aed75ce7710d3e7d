"""Command-line scenarios, verification runs and plots."""
