"""Hodograph solutions, gradient catastrophes and regularizations of the Jordan chain."""

__version__ = "0.1.0"
