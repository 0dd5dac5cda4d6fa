# Reference computations for DKPP
