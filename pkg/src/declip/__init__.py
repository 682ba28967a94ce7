"""Real-time speech declipping toolkit.

Subpackages and modules:

- ``signal_core``: hard clipping, masks, SNR, threshold search, extrema stats
- ``spectral``: STFT magnitudes and multi-resolution spectral losses
- ``engine``: the streaming neural declipping engine
- ``aspade``: sparse-recovery (ADMM) baseline declipper
- ``streamsim``: virtual-clock streaming latency/RTF simulator
- ``wavio``: RIFF/WAVE reading and writing
- ``cli``: command line entry points
"""

from declip.signal_core import Waveform, hard_clip, clip_mask, snr_db

__all__ = ["Waveform", "hard_clip", "clip_mask", "snr_db"]

__version__ = "0.1.0"
