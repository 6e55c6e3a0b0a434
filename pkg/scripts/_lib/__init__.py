"""fn-lab library: finite topologies, witnesses, quotients, games and acceptance sweeps."""
