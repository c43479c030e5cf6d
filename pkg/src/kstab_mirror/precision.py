"""Working precision for the extended-precision amplitude arithmetic."""

import os
from contextlib import contextmanager

import mpmath

ENV_VAR = "KSTAB_PRECISION"
MIN_BITS = 128


def default_bits() -> int:
    raw = os.environ.get(ENV_VAR)
    if raw is None or raw.strip() == "":
        return 256
    bits = int(raw)
    if bits < MIN_BITS:
        raise ValueError(f"{ENV_VAR}={bits} is below the {MIN_BITS}-bit floor")
    return bits


def _initial_bits() -> int:
    # a bad environment value is reported by the CLI, not at import
    try:
        return default_bits()
    except ValueError:
        return 256


mpmath.mp.prec = _initial_bits()


@contextmanager
def working_precision(bits: int | None):
    """Temporarily set the mpmath significand width (no-op for ``None``)."""
    if bits is None:
        yield
        return
    if bits < MIN_BITS:
        raise ValueError(f"precision {bits} is below the {MIN_BITS}-bit floor")
    old = mpmath.mp.prec
    mpmath.mp.prec = bits
    try:
        yield
    finally:
        mpmath.mp.prec = old
