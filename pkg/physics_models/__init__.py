"""Physics of photon recoil in Rydberg-blockade gates."""
