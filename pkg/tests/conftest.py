from __future__ import annotations

import numpy as np
import pytest

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-8) -> bool:
    a, b = np.ravel(a), np.ravel(b)
    i = int(np.argmax(np.abs(b)))
    if abs(b[i]) < tol:
        return np.allclose(a, b, atol=tol)
    phase = a[i] / b[i]
    return abs(abs(phase) - 1) < tol and np.allclose(a, phase * b, atol=tol)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def unitary(c) -> np.ndarray:
    """Full unitary of a small circuit, column by column from basis states."""
    from hbr.circuit import GateKind, gate
    from hbr.simulator import statevector

    n = c.n_qubits
    cols = []
    for i in range(2**n):
        prep = [gate(GateKind.X, q) for q in range(n) if (i >> (n - 1 - q)) & 1]
        cols.append(statevector(c.with_gates(prep + list(c.gates))))
    return np.array(cols).T
