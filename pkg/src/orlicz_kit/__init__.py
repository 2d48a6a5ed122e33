"""Numerical toolkit for Orlicz and Orlicz-Sobolev spaces."""

from .grid import Grid, GridFunction
from .nfunction import NFunction

__version__ = "0.1.0"
