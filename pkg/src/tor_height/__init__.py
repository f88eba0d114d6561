import sys

__all__ = ["__version__"]

__version__ = "0.1.0"

# N_ell and class polynomial coefficients run past the default int-to-str digit limit.
if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(0)
