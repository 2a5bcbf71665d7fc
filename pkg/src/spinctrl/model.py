"""Heisenberg spin-chain model: Hamiltonians, piecewise-constant propagation
and Bloch trajectories.

Conventions: spin operators are the bare Pauli matrices; control-field
amplitudes are in units of the chain coupling and times in its inverse.
Slice 1 of a control sequence acts first, so the total propagator is
U_n ... U_2 U_1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg


@dataclass(frozen=True)
class ChainSpec:
    """Chain geometry and couplings.

    ``gamma`` scales the star coupling between every chain site and the
    extra environment qubit used when ``env_enabled`` is set; the coupling
    is additionally proportional to the per-slice pulse magnitude.
    """

    n_sites: int
    coupling: float = 1.0
    env_enabled: bool = False
    gamma: float = 0.1

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError("chain needs at least one site")
        if self.coupling <= 0:
            raise ValueError("coupling must be positive")
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")

    @property
    def dim(self) -> int:
        return 2**self.n_sites


@dataclass(frozen=True)
class ControlSequence:
    """Piecewise-constant pulse amplitudes (hx, hy) with slice duration dt.

    Amplitudes must respect |h| <= bound; the optimizer keeps iterates inside
    the box by projection.
    """

    hx: np.ndarray
    hy: np.ndarray
    dt: float
    bound: float

    def __post_init__(self):
        hx = np.atleast_1d(np.asarray(self.hx, dtype=np.float64))
        hy = np.atleast_1d(np.asarray(self.hy, dtype=np.float64))
        object.__setattr__(self, "hx", hx)
        object.__setattr__(self, "hy", hy)
        if hx.ndim != 1 or hx.shape != hy.shape:
            raise ValueError("hx and hy must be 1-D arrays of equal length")
        if hx.size < 1:
            raise ValueError("at least one pulse slice is required")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.bound <= 0:
            raise ValueError("bound must be positive")
        if max(np.max(np.abs(hx)), np.max(np.abs(hy))) > self.bound + 1e-12:
            raise ValueError("pulse amplitudes exceed the bound")

    @property
    def n(self) -> int:
        return int(self.hx.size)

    @property
    def duration(self) -> float:
        return self.n * self.dt

    def pulse_vector(self) -> np.ndarray:
        """Flat parameter vector [hx_1..hx_n, hy_1..hy_n]."""
        return np.concatenate([self.hx, self.hy])

    @classmethod
    def from_vector(cls, x: np.ndarray, dt: float, bound: float) -> "ControlSequence":
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1 or x.size % 2 != 0:
            raise ValueError("pulse vector must be 1-D with even length")
        n = x.size // 2
        return cls(hx=x[:n].copy(), hy=x[n:].copy(), dt=dt, bound=bound)

    @classmethod
    def zeros(cls, n: int, dt: float, bound: float) -> "ControlSequence":
        return cls(hx=np.zeros(n), hy=np.zeros(n), dt=dt, bound=bound)


@dataclass(frozen=True)
class TargetGate:
    """Target operation: negate the last qubit (NOT) or swap the last two (SWAP)."""

    kind: str
    n_sites: int

    def __post_init__(self):
        if self.kind not in ("NOT", "SWAP"):
            raise ValueError(f"unknown target kind {self.kind!r}; expected 'NOT' or 'SWAP'")
        minimum = 1 if self.kind == "NOT" else 2
        if self.n_sites < minimum:
            raise ValueError(f"{self.kind} requires at least {minimum} sites")


_SWAP2 = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128
)


def target_unitary(target: TargetGate) -> np.ndarray:
    """The target gate as a dense unitary on the full chain."""
    if target.kind == "NOT":
        left = np.eye(2 ** (target.n_sites - 1), dtype=np.complex128)
        return linalg.kron(left, linalg.pauli("x"))
    left = np.eye(2 ** (target.n_sites - 2), dtype=np.complex128)
    return linalg.kron(left, _SWAP2)


def drift_hamiltonian(spec: ChainSpec) -> np.ndarray:
    """Isotropic nearest-neighbour Heisenberg coupling; zero matrix for a single site."""
    h = np.zeros((spec.dim, spec.dim), dtype=np.complex128)
    for i in range(1, spec.n_sites):
        for axis in "xyz":
            op = linalg.pauli(axis)
            h += linalg.embed_single_site(op, i, spec.n_sites) @ linalg.embed_single_site(
                op, i + 1, spec.n_sites
            )
    return spec.coupling * h


def control_hamiltonian(hx: float, hy: float, n_sites: int) -> np.ndarray:
    """Zeeman-like x/y field acting on the first site only."""
    return hx * linalg.embed_single_site(
        linalg.pauli("x"), 1, n_sites
    ) + hy * linalg.embed_single_site(linalg.pauli("y"), 1, n_sites)


def env_coupling_operator(n_sites: int) -> np.ndarray:
    """Star coupling of every chain site to an extra qubit appended last.

    Sum over i of Sx^i Sx^(N+1) + Sy^i Sy^(N+1) + Sz^i Sz^(N+1) on N+1 qubits.
    """
    total = n_sites + 1
    c = np.zeros((2**total, 2**total), dtype=np.complex128)
    for i in range(1, n_sites + 1):
        for axis in "xyz":
            op = linalg.pauli(axis)
            c += linalg.embed_single_site(op, i, total) @ linalg.embed_single_site(
                op, total, total
            )
    return c


def env_hamiltonian(spec: ChainSpec, hx: float, hy: float) -> np.ndarray:
    """Single-slice Hamiltonian on chain + environment qubit.

    The chain part is the drift plus the control field; the environment
    qubit couples to every site with strength gamma * (|hx| + |hy|).
    """
    if not spec.env_enabled:
        raise ValueError("environment qubit is not enabled in this ChainSpec")
    eye2 = np.eye(2, dtype=np.complex128)
    chain_part = drift_hamiltonian(spec) + control_hamiltonian(hx, hy, spec.n_sites)
    h = linalg.kron(chain_part, eye2)
    strength = spec.gamma * (abs(hx) + abs(hy))
    if strength != 0.0:
        h = h + strength * env_coupling_operator(spec.n_sites)
    return h


def slice_hamiltonians(spec: ChainSpec, seq: ControlSequence) -> np.ndarray:
    """Stack of per-slice Hamiltonians, shape (n, dim, dim)."""
    h0 = drift_hamiltonian(spec)
    sx1 = linalg.embed_single_site(linalg.pauli("x"), 1, spec.n_sites)
    sy1 = linalg.embed_single_site(linalg.pauli("y"), 1, spec.n_sites)
    return (
        h0[None, :, :]
        + seq.hx[:, None, None] * sx1[None, :, :]
        + seq.hy[:, None, None] * sy1[None, :, :]
    )


def env_slice_hamiltonians(spec: ChainSpec, seq: ControlSequence) -> np.ndarray:
    """Per-slice Hamiltonians on chain + environment qubit, shape (n, 2*dim, 2*dim)."""
    if not spec.env_enabled:
        raise ValueError("environment qubit is not enabled in this ChainSpec")
    eye2 = np.eye(2, dtype=np.complex128)
    base = linalg.kron(drift_hamiltonian(spec), eye2)
    sx1 = linalg.kron(
        linalg.embed_single_site(linalg.pauli("x"), 1, spec.n_sites), eye2
    )
    sy1 = linalg.kron(
        linalg.embed_single_site(linalg.pauli("y"), 1, spec.n_sites), eye2
    )
    coupling = env_coupling_operator(spec.n_sites)
    strength = spec.gamma * (np.abs(seq.hx) + np.abs(seq.hy))
    return (
        base[None, :, :]
        + seq.hx[:, None, None] * sx1[None, :, :]
        + seq.hy[:, None, None] * sy1[None, :, :]
        + strength[:, None, None] * coupling[None, :, :]
    )


def eigh_stack(h_stack: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched Hermitian eigendecomposition of a stack of matrices."""
    sym = (h_stack + h_stack.conj().swapaxes(-1, -2)) / 2.0
    return np.linalg.eigh(sym)


def propagators_from_eigh(evals: np.ndarray, evecs: np.ndarray, dt: float) -> np.ndarray:
    """Slice propagators exp(-i*dt*H_j) from a batched eigendecomposition."""
    phases = np.exp(-1j * dt * evals)
    return (evecs * phases[:, None, :]) @ evecs.conj().swapaxes(-1, -2)


def _ordered_product(props: np.ndarray) -> np.ndarray:
    """Time-ordered product: the first slice in the stack acts first."""
    u = np.eye(props.shape[-1], dtype=np.complex128)
    for p in props:
        u = p @ u
    return u


def propagate(spec: ChainSpec, seq: ControlSequence) -> np.ndarray:
    """Total unitary generated by the control sequence on the bare chain."""
    evals, evecs = eigh_stack(slice_hamiltonians(spec, seq))
    return _ordered_product(propagators_from_eigh(evals, evecs, seq.dt))


def propagate_with_env(spec: ChainSpec, seq: ControlSequence) -> np.ndarray:
    """Total unitary on chain + environment qubit, with pulse-proportional coupling."""
    evals, evecs = eigh_stack(env_slice_hamiltonians(spec, seq))
    return _ordered_product(propagators_from_eigh(evals, evecs, seq.dt))


def _qubit_bloch_vectors(psi: np.ndarray, n_sites: int) -> np.ndarray:
    """Bloch vector of each qubit's reduced state, shape (n_sites, 3)."""
    paulis = [linalg.pauli(a) for a in "xyz"]
    tensor = psi.reshape((2,) * n_sites)
    out = np.empty((n_sites, 3))
    for i in range(n_sites):
        v = np.moveaxis(tensor, i, 0).reshape(2, -1)
        rho = v @ v.conj().T
        for k, s in enumerate(paulis):
            out[i, k] = np.real(np.trace(rho @ s))
    return out


def bloch_trajectories(
    spec: ChainSpec, seq: ControlSequence, initial_state: str
) -> np.ndarray:
    """Per-qubit Bloch vectors at every slice boundary.

    ``initial_state`` is an N-character bit string labelling a computational
    basis state; qubit 1 is the leftmost character. Returns an array of shape
    (n + 1, n_sites, 3) holding (<sx>, <sy>, <sz>) for each qubit, with row 0
    the initial state.
    """
    label = initial_state.strip()
    if len(label) != spec.n_sites or any(c not in "01" for c in label):
        raise ValueError(
            f"initial state {initial_state!r} is not a {spec.n_sites}-bit string"
        )
    psi = np.zeros(spec.dim, dtype=np.complex128)
    psi[int(label, 2)] = 1.0
    evals, evecs = eigh_stack(slice_hamiltonians(spec, seq))
    props = propagators_from_eigh(evals, evecs, seq.dt)
    out = np.empty((seq.n + 1, spec.n_sites, 3))
    out[0] = _qubit_bloch_vectors(psi, spec.n_sites)
    for j, p in enumerate(props):
        psi = p @ psi
        out[j + 1] = _qubit_bloch_vectors(psi, spec.n_sites)
    return out
