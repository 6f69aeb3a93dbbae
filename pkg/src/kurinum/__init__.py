"""Kurihara numbers of newforms from exact modular symbols."""

__version__ = "0.1.0"
