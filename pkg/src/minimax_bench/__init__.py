"""Saddle-point optimization toolkit.

Subpackages:

* :mod:`minimax_bench.problems`   - SCSC quadratic / bilinear / worst-case games
* :mod:`minimax_bench.algorithms` - GDA family step functions and run loop
* :mod:`minimax_bench.theory`     - certified step sizes, rates, unit-disk tests
* :mod:`minimax_bench.spectral`   - iteration matrices and spectral radii
* :mod:`minimax_bench.lyapunov`   - Lyapunov values and contraction verification
* :mod:`minimax_bench.harness`    - experiment orchestration and the CLI
"""

from . import algorithms, harness, lyapunov, problems, spectral, theory

__version__ = "0.1.0"

__all__ = ["problems", "algorithms", "theory", "spectral", "lyapunov", "harness", "__version__"]
