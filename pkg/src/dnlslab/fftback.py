"""
Planned 1-D FFTs for the time stepper.

pyfftw is used when installed (several times faster at the sizes used
here); otherwise scipy.fft. Both return fresh arrays with numpy's
normalization (the inverse carries 1/N).
"""

from __future__ import annotations

import numpy as np
import scipy.fft as sfft

try:
    import pyfftw
    import pyfftw.builders as _builders
except ImportError:  # pragma: no cover - exercised only without pyfftw
    pyfftw = None


class FFTPlan:
    def __init__(self, n: int, use_fftw: bool | None = None):
        self.n = n
        if use_fftw is None:
            use_fftw = pyfftw is not None
        self.backend = "pyfftw" if use_fftw and pyfftw is not None else "scipy"
        if self.backend == "pyfftw":
            buf = pyfftw.empty_aligned(n, dtype=complex)
            self._f = _builders.fft(buf, planner_effort="FFTW_MEASURE", threads=1)
            buf = pyfftw.empty_aligned(n, dtype=complex)
            self._b = _builders.ifft(buf, planner_effort="FFTW_MEASURE", threads=1)

    def fft(self, x: np.ndarray) -> np.ndarray:
        if self.backend == "pyfftw":
            return self._f(x).copy()
        return sfft.fft(x)

    def ifft(self, x: np.ndarray) -> np.ndarray:
        if self.backend == "pyfftw":
            return self._b(x).copy()
        return sfft.ifft(x)
