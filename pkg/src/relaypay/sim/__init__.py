"""Round scheduler, substrate wiring, adversary harness and metrics."""
