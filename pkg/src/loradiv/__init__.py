"""Multi-antenna LoRa detection: simulation and error-rate theory."""

__version__ = "0.1.0"
