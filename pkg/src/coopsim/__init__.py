"""Cooperative-perception driving simulator with a lossy, delayed V2X channel."""

__version__ = "0.1.0"
