# Duhamel map and Picard solver for DKPP
