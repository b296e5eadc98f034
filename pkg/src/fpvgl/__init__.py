"""FPV quadcopter ground-link toolkit.

Wire-exact telemetry codec, timestamping relay, position-mode digital-twin
simulator, synchronized session logging, geodetic trajectory analysis and
imitation-learning episode export, sharing one data pipeline for simulated
and physical flights.
"""

__version__ = "0.1.0"

from . import analysis, episodes, flightlog, geodesy, mavlink, relay, sim

__all__ = ["analysis", "episodes", "flightlog", "geodesy", "mavlink",
           "relay", "sim", "__version__"]
