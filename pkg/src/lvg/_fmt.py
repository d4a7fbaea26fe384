def fmt(x):
    """Shortest decimal that round-trips to the same double."""
    return "" if x is None else repr(float(x))
