# Numerics