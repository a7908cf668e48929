"""Backend package for rydfid: command-line entry point, services and records."""

__version__ = "1.0.0"
