# Problem model for DKPP
