"""Small argument checks shared by the public constructors."""

import math
import numbers

from serrin_lab.exceptions import ValidationError


def check_real(value, name, *, gt=None, ge=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ValidationError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}")
    if gt is not None and not value > gt:
        raise ValidationError(f"{name} must be > {gt}, got {value!r}")
    if ge is not None and not value >= ge:
        raise ValidationError(f"{name} must be >= {ge}, got {value!r}")
    return value


def check_int(value, name, *, ge=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ValidationError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if ge is not None and value < ge:
        raise ValidationError(f"{name} must be >= {ge}, got {value!r}")
    return value


def check_point(value, name):
    try:
        x, y = value
    except (TypeError, ValueError):
        raise ValidationError(f"{name} must be a 2D point, got {value!r}") from None
    return (check_real(x, f"{name}[0]"), check_real(y, f"{name}[1]"))


def reject_unknown_keys(config, allowed, where):
    unknown = sorted(set(config) - set(allowed))
    if unknown:
        raise ValidationError(f"unknown key(s) in {where}: {', '.join(unknown)}")
