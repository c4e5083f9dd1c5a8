"""A stand-alone proving service for verifiable off-chain computation."""

__version__ = "0.1.0"
