"""Figure scripts for qnetcap sweep outputs."""

__version__ = "0.1.0"
