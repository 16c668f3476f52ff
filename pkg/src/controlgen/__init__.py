"""Security-control Gherkin generation pipeline with rubric-based review."""

__version__ = "0.1.0"
