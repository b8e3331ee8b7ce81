"""Full-duplex transceiver simulation with parallel-Hammerstein nonlinear SI cancellation."""

__version__ = "0.1.0"
