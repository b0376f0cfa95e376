"""Fixed point invariants of product and cyclic maps, checked exactly at desk scale."""

__version__ = "0.1.0"
