"""Physical constants shared across modules."""

# Propagation speed used for all delay/range/Doppler conversions.
SPEED_OF_LIGHT = 2.998e8  # m/s
