import numpy as np
import pytest

from a2fdm.modem import map_bits, qam


@pytest.fixture
def rng():
    return np.random.default_rng(20241015)


def random_qam(rng, n, order=4, shape=()):
    c = qam(order)
    bits = rng.integers(0, 2, size=shape + (n * c.bits_per_symbol,), dtype=np.uint8)
    if shape:
        return np.stack([map_bits(b, c) for b in bits.reshape(-1, bits.shape[-1])]).reshape(shape + (n,))
    return map_bits(bits, c)


def idaft_direct(s, c1, c2):
    """Double loop over the IDAFT sum; independent of the library's matrices."""
    N = len(s)
    x = np.zeros(N, dtype=complex)
    for n in range(N):
        for m in range(N):
            x[n] += s[m] * np.exp(2j * np.pi * (c1 * n * n + m * n / N + c2 * m * m))
    return x / np.sqrt(N)


ACCEPTANCE_LINES: list[str] = []


def report(criterion: int, ok: bool, detail: str) -> None:
    """Record one acceptance verdict; all of them are echoed in the terminal summary."""
    line = f"CRITERION {criterion:>2} {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1])):
            terminalreporter.write_line(line)
