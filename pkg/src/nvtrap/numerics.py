"""Small shared numerical helpers."""

from .errors import BracketError


def bisect_root(f, lo, hi, xtol=1e-3, max_iter=60):
    """Root of ``f`` on [lo, hi] by plain bisection.

    Requires a sign change over the bracket. Returns the bracket midpoint once
    the bracket width falls below ``xtol`` or after ``max_iter`` halvings.
    """
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        raise BracketError(f"no sign change on [{lo!r}, {hi!r}]")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (fmid > 0.0) == (flo > 0.0):
            lo, flo = mid, fmid
        else:
            hi = mid
        if hi - lo < xtol:
            break
    return 0.5 * (lo + hi)
