# Utility functions

import hashlib
import itertools

from fractions import Fraction
from typing import Iterable


def nonempty_subsets(items, proper=False):
    """Yields all nonempty subsets of the given sequence as tuples, preserving the order of the items.

    Args:
        items (Sequence): the items.
        proper (bool, optional): if True, the full sequence itself is skipped. Defaults to False.
    """
    n = len(items)
    top = n - 1 if proper else n
    for k in range(1, top + 1):
        yield from itertools.combinations(items, k)

def parse_fraction(text: str) -> Fraction:
    """Parses an exact rational number written as `p/q` or as an integer.

    Raises:
        ValueError: for decimal or scientific notation, which would hide a rounding.
    """
    text = text.strip()
    if any(c in text for c in '.eE'):
        raise ValueError(f"'{text}' is not an exact rational, write it as p/q.")

    return Fraction(text)

def stable_hash(items: Iterable[str], length: int = 10) -> str:
    """Returns a short hexadecimal digest of the given strings, independent of the interpreter's hash seed."""
    h = hashlib.sha1()
    for s in items:
        h.update(s.encode('utf-8'))
        h.update(b'\0')

    return h.hexdigest()[:length]
