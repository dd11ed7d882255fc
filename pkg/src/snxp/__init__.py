"""Sub-luminal propagation of spectrally narrow x-ray pulses.

Simulation and analysis toolkit for narrowband 14.4 keV pulses generated by
a resonant 57Fe foil and reflected off a thin-film cavity: pulse spectra,
cavity group delays, synthetic photon-count maps, and the two-stage delay
fit used to recover the pulse delay curve.
"""

__version__ = "1.0.0"
