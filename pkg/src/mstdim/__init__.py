"""Masked spatiotemporal contrastive state-representation learning toolkit."""

__version__ = "0.1.0"
