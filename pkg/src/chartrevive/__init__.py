"""Deconstruct static SVG charts and revive them as narrated, animated Live Charts."""

__version__ = "0.1.0"
