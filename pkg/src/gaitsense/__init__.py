"""gaitsense: desk-scale triboelectric gait monitoring, end to end.

Synthetic 4-channel sensor records, EMD/wavelet/STFT signal processing,
a from-scratch CNN-BiLSTM-attention classifier, and a streaming gateway
with multi-terminal event fan-out.
"""

from .backend import BACKEND_NAME
from .signal import MultiChannelRecord, Signal, SnrReport, normalize, pearson, snr_db

__version__ = "0.1.0"

__all__ = [
    "BACKEND_NAME",
    "MultiChannelRecord",
    "Signal",
    "SnrReport",
    "normalize",
    "pearson",
    "snr_db",
    "__version__",
]
