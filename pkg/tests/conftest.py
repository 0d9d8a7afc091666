import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_bits(gen, n):
    return gen.integers(0, 2, size=n, dtype=np.uint8)


def random_tri(gen, n, p=0.3):
    u = gen.random(n)
    return np.where(u < p, 2, np.where(u < (1 + p) / 2, 0, 1)).astype(np.uint8)


def lcs_reference(a, b) -> int:
    """Plain quadratic DP, kept deliberately independent of the package."""
    a = list(a)
    b = list(b)
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j in range(1, len(b) + 1):
            if x == b[j - 1]:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = max(prev[j], cur[j - 1])
        prev = cur
    return prev[len(b)]


def subsequences_oracle(a, b) -> int:
    """Exhaustive search over all subsequences of a; for tiny inputs only."""
    a = list(a)
    b = list(b)
    assert len(a) <= 14

    def is_subseq(s, t):
        it = iter(t)
        return all(c in it for c in s)

    best = 0
    for mask in range(1 << len(a)):
        s = [a[i] for i in range(len(a)) if mask >> i & 1]
        if len(s) > best and is_subseq(s, b):
            best = len(s)
    return best
