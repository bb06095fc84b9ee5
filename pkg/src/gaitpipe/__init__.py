"""gaitpipe: smartphone-IMU walking-speed estimation pipeline.

Stages: FIR denoising (dsp), orientation-independent vertical/horizontal
decomposition (alignment), 45x4 gait-image construction (imaging), a
from-scratch convolutional regression network (net), a synthetic gait
generator for desk-scale verification (synthgait), and experiment
orchestration (pipeline) with CSV/PNG reporting (reports, cli).
"""

__version__ = "0.1.0"
