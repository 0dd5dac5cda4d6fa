# Command-line runner for DKPP
