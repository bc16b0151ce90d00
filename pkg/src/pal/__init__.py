"""Priority algorithms with advice: simulation, adversaries, gadget reductions."""
