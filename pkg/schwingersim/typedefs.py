from typing import Any

import numpy as np
import numpy.typing as npt

Site = int
"""Lattice site, 1-indexed like every formula in the model"""
JSON = Any
"""Parsed config or manifest content"""
JSONDict = dict[str, JSON]
ComplexArray = npt.NDArray[np.complex128]
RealArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]
