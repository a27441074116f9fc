"""Multi-view restricted kernel machine forecasting."""

__version__ = "0.1.0"
