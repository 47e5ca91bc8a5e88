"""aitotal: monitoring stack for deployed security ML models."""

__version__ = "0.1.0"
