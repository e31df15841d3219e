"""Shared cat-state resource and the parties' local operations.

Two backends are kept side by side on a :class:`CatRegister`:

exact
    the relative phase of ``|1...1>`` as an integer modulo ``2**n``.  Every
    phase the protocol applies is a multiple of ``2*pi/2**n``, so this is
    the authoritative record.
vector
    a dense ``2**k`` complex amplitude vector (optional, ``k <= 20``) used to
    cross-check the exact backend and to handle phases outside the promise.

Basis index convention: party ``i`` (0-based) owns bit ``k-1-i`` of the
basis index, so party 0 is the most significant bit and a measured index
converts to ``b_1 ... b_k`` by reading its binary expansion left to right.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

MAX_VECTOR_QUBITS = 20
NORM_TOL = 1e-12


class Stage(enum.IntEnum):
    SHARED = 0
    PHASED = 1
    ROTATED = 2
    MEASURED = 3


class StageError(RuntimeError):
    """Operation applied to a register in the wrong stage."""


class ExactBackendRefused(ValueError):
    """Relative phase is not +-1, so the closed form does not apply."""


@dataclass
class CatRegister:
    k: int
    n: int
    accumulated_phase: int = 0
    amplitudes: Optional[np.ndarray] = None
    stage: Stage = Stage.SHARED
    # set by apply_hadamard_all when the relative phase is +-1
    exact_parity: Optional[int] = None

    def relative_phase(self) -> complex:
        return complex(np.exp(2j * np.pi * self.accumulated_phase / 2**self.n))

    def to_json(self) -> dict:
        out = {
            "k": self.k,
            "n": self.n,
            "stage": self.stage.name.capitalize(),
            "accumulated_phase": self.accumulated_phase,
        }
        if self.amplitudes is not None:
            out["amplitudes"] = [[float(a.real), float(a.imag)] for a in self.amplitudes]
        return out


@dataclass(frozen=True)
class MeasurementRecord:
    bits: tuple[int, ...]
    seed: object

    @property
    def parity(self) -> int:
        return sum(self.bits) % 2


def make_cat_state(k: int, n: int, vector: bool = False) -> CatRegister:
    """Fresh ``(|0...0> + |1...1>)/sqrt(2)`` shared by ``k`` parties."""
    if k < 2:
        raise ValueError(f"a cat state needs k >= 2 qubits, got {k}")
    if n < 1:
        raise ValueError(f"phase modulus exponent must be >= 1, got {n}")
    amps = None
    if vector:
        if k > MAX_VECTOR_QUBITS:
            raise ValueError(f"vector backend limited to k <= {MAX_VECTOR_QUBITS}, got {k}")
        amps = np.zeros(2**k, dtype=complex)
        amps[0] = amps[-1] = 1 / np.sqrt(2)
    return CatRegister(k=k, n=n, amplitudes=amps)


def _require(r: CatRegister, *stages: Stage) -> None:
    if r.stage not in stages:
        allowed = ", ".join(s.name for s in stages)
        raise StageError(f"register is {r.stage.name}, operation needs {allowed}")


def _party_mask(k: int, party_index: int) -> np.ndarray:
    idx = np.arange(2**k)
    return ((idx >> (k - 1 - party_index)) & 1).astype(bool)


def apply_phase(r: CatRegister, party_index: int, x: int) -> CatRegister:
    """Party ``party_index`` applies ``|1> -> exp(2*pi*i*x/2**n)|1>`` to its qubit."""
    _require(r, Stage.SHARED, Stage.PHASED)
    if not 0 <= party_index < r.k:
        raise IndexError(f"party index {party_index} out of range for k={r.k}")
    if not 0 <= x < 2**r.n:
        raise ValueError(f"phase input {x} outside [0, {2**r.n - 1}]")
    r.accumulated_phase = (r.accumulated_phase + x) % 2**r.n
    if r.amplitudes is not None:
        r.amplitudes[_party_mask(r.k, party_index)] *= np.exp(2j * np.pi * x / 2**r.n)
    r.stage = Stage.PHASED
    return r


def hadamard_all(amps: np.ndarray) -> np.ndarray:
    """Walsh-Hadamard on every qubit of a dense state (in-place butterflies)."""
    out = amps.copy()
    size = out.size
    h = 1
    s = 1 / np.sqrt(2)
    while h < size:
        view = out.reshape(-1, 2, h)
        a = view[:, 0, :].copy()
        b = view[:, 1, :]
        view[:, 0, :] = (a + b) * s
        view[:, 1, :] = (a - b) * s
        h *= 2
    return out


def parity_table(k: int) -> np.ndarray:
    idx = np.arange(2**k, dtype=np.int64)
    par = np.zeros(2**k, dtype=np.int64)
    for bit in range(k):
        par ^= (idx >> bit) & 1
    return par


def exact_distribution(k: int, parity: int) -> np.ndarray:
    """Uniform over the ``2**(k-1)`` basis strings of the given parity."""
    probs = (parity_table(k) == parity).astype(float)
    return probs / probs.sum()


def apply_hadamard_all(r: CatRegister) -> CatRegister:
    _require(r, Stage.PHASED)
    half = 2 ** (r.n - 1)
    if r.accumulated_phase in (0, half):
        # relative phase +1 -> even parity, -1 -> odd parity
        r.exact_parity = 0 if r.accumulated_phase == 0 else 1
    elif r.amplitudes is None:
        raise ExactBackendRefused(
            f"accumulated phase {r.accumulated_phase} is not 0 or {half} mod 2**{r.n}; "
            "rebuild the register with vector=True"
        )
    if r.amplitudes is not None:
        r.amplitudes = hadamard_all(r.amplitudes)
        norm = float(np.linalg.norm(r.amplitudes))
        if abs(norm - 1) > NORM_TOL:
            raise AssertionError(f"state norm drifted to {norm!r}")
    r.stage = Stage.ROTATED
    return r


def outcome_distribution(r: CatRegister, backend: str = "auto") -> np.ndarray:
    """Probabilities over basis indices after the Hadamard layer.

    ``backend`` is ``"exact"``, ``"vector"`` or ``"auto"`` (exact when it
    applies).  The exact array is materialised only on request; it has
    ``2**k`` entries.
    """
    _require(r, Stage.ROTATED, Stage.MEASURED)
    if backend == "auto":
        backend = "exact" if r.exact_parity is not None else "vector"
    if backend == "exact":
        if r.exact_parity is None:
            raise ExactBackendRefused("exact backend does not apply to this register")
        return exact_distribution(r.k, r.exact_parity)
    if backend == "vector":
        if r.amplitudes is None:
            raise ValueError("register was built without the vector backend")
        return np.abs(r.amplitudes) ** 2
    raise ValueError(f"unknown backend {backend!r}")


def measure(r: CatRegister, seed, backend: str = "auto") -> MeasurementRecord:
    """Measure every qubit in the computational basis.

    The exact sampler draws ``b_1 .. b_{k-1}`` as fair coins and then sets
    ``b_k`` to complete the parity; this samples the uniform distribution
    on the parity class and keeps the first ``k-1`` outcomes independent of
    the phases (a convenient coupling for replay tests).
    """
    _require(r, Stage.ROTATED)
    rng = np.random.default_rng(seed)
    if backend == "auto":
        backend = "exact" if r.exact_parity is not None else "vector"
    if backend == "exact":
        if r.exact_parity is None:
            raise ExactBackendRefused("exact backend does not apply to this register")
        head = [int(b) for b in rng.integers(0, 2, size=r.k - 1)]
        bits = tuple(head + [(sum(head) + r.exact_parity) % 2])
    else:
        probs = outcome_distribution(r, "vector")
        index = int(rng.choice(probs.size, p=probs / probs.sum()))
        bits = tuple((index >> (r.k - 1 - i)) & 1 for i in range(r.k))
    r.stage = Stage.MEASURED
    return MeasurementRecord(bits=bits, seed=seed)


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(p - q).sum())


def run_pipeline(xs, n: int, seed, vector: bool = False, backend: str = "auto") -> MeasurementRecord:
    """Cat state -> every party's phase -> Hadamard layer -> measurement."""
    r = make_cat_state(len(xs), n, vector=vector)
    for i, x in enumerate(xs):
        apply_phase(r, i, x)
    apply_hadamard_all(r)
    return measure(r, seed, backend=backend)
