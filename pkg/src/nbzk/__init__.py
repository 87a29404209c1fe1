"""nbzk: a desk-scale lab for constant-round zero-knowledge with no-cloning extraction."""

__version__ = "0.1.0"
