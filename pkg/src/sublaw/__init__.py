"""sublaw: sublinear expectation spaces at desk scale."""

__version__ = "0.1.0"
