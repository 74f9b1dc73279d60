"""Neural-network quantum states in second quantization and constructive
universal-approximation builders, verified by brute-force enumeration."""

__version__ = "0.1.0"
