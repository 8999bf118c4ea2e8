"""Hashtag co-occurrence networks, topics and group attention over time."""

__version__ = "0.1.0"
