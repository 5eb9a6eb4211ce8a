"""Fair content delivery over payment channel networks: primitives, substrate,
protocol engines and a deterministic round simulator."""

__version__ = "0.1.0"
