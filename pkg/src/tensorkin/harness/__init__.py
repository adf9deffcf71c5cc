"""Monte Carlo verification harness and command-line interface."""
