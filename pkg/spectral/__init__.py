# Spectral core for DKPP
