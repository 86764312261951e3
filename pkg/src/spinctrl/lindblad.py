"""Lindbladian superoperators, propagators, fidelities and their gradients.

Everything acts on row-major vectorized density matrices (see
:mod:`spinctrl.linalg`): the master equation becomes

    d res(rho)/dt = F res(rho),     F = K(H) + D,

with the commutator part ``K(H) = -i (H kron I - I kron conj(H))`` and the
dissipator ``D = sum_j gamma_j (L_j kron conj(L_j)
- 1/2 ((L_j^dag L_j) kron I + I kron conj(L_j^dag L_j)))``.

Superoperators and propagators are plain complex128 ``(d^2, d^2)`` arrays.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .linalg import dagger, kron, res, spectral_norm_upper, unres
from .model import build_collapse_ops, build_controls, build_drift

__all__ = [
    "PulseSequence",
    "Generator",
    "assemble_dissipator",
    "assemble_hamiltonian_super",
    "build_generator",
    "unitary_superoperator",
    "target_superoperator",
    "step_propagator_exact",
    "total_propagator_exact",
    "split_factors",
    "split_propagator",
    "split_gradient",
    "machnes_gradient",
    "dt_validity_check",
    "superop_fidelity",
    "state_fitness",
    "propagate_state",
]


@dataclass(frozen=True, eq=False)
class PulseSequence:
    """Piecewise-constant control amplitudes: M intervals of length dt.

    Empty sequences are allowed and act as the identity propagator.
    """

    hx: np.ndarray
    hy: np.ndarray
    dt: float

    def __post_init__(self):
        hx = np.atleast_1d(np.asarray(self.hx, dtype=np.float64))
        hy = np.atleast_1d(np.asarray(self.hy, dtype=np.float64))
        if hx.ndim != 1 or hy.ndim != 1 or hx.shape != hy.shape:
            raise ValueError("hx and hy must be 1-D arrays of equal length")
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        object.__setattr__(self, "hx", hx)
        object.__setattr__(self, "hy", hy)
        object.__setattr__(self, "dt", float(self.dt))

    @property
    def num_pulses(self):
        return self.hx.shape[0]

    @property
    def duration(self):
        return self.num_pulses * self.dt

    @classmethod
    def from_genome(cls, genome, dt):
        """Split a flat parameter vector (hx's then hy's) into a sequence."""
        genome = np.asarray(genome, dtype=np.float64).reshape(-1)
        if genome.size % 2:
            raise ValueError("genome length must be even (hx block then hy block)")
        m = genome.size // 2
        return cls(genome[:m], genome[m:], dt)

    def genome(self):
        return np.concatenate([self.hx, self.hy])


@dataclass(frozen=True, eq=False)
class Generator:
    """Assembled Lindbladian pieces for one system + noise configuration.

    ``dissipator = jump_part + decay_part`` keeps the two split-method
    exponents available: the jump part is ``sum gamma L kron conj(L)`` and
    the decay part the anticommutator half.
    """

    dissipator: np.ndarray
    drift_comm: np.ndarray
    control_comms: tuple
    dim: int
    jump_part: np.ndarray
    decay_part: np.ndarray

    @property
    def base(self):
        """Control-independent generator: drift commutator plus dissipator."""
        return self.drift_comm + self.dissipator

    def at(self, hx, hy):
        """Full generator F(hx, hy)."""
        return self.base + hx * self.control_comms[0] + hy * self.control_comms[1]


def _dissipator_parts(collapse_ops, dim):
    d2 = dim * dim
    jump = np.zeros((d2, d2), dtype=np.complex128)
    decay = np.zeros((d2, d2), dtype=np.complex128)
    ident = np.eye(dim, dtype=np.complex128)
    for op, gamma in collapse_ops:
        op = np.asarray(op, dtype=np.complex128)
        if op.shape != (dim, dim):
            raise ValueError(
                f"collapse operator has shape {op.shape}, expected {(dim, dim)}"
            )
        gram = dagger(op) @ op
        jump += gamma * kron(op, np.conj(op))
        decay += -0.5 * gamma * (kron(gram, ident) + kron(ident, np.conj(gram)))
    return jump, decay


def assemble_dissipator(collapse_ops):
    """Dissipative superoperator for a list of ``(L, gamma)`` pairs."""
    ops = list(collapse_ops)
    if not ops:
        raise ValueError("assemble_dissipator needs at least one collapse operator")
    dim = np.asarray(ops[0][0]).shape[0]
    jump, decay = _dissipator_parts(ops, dim)
    return jump + decay


def assemble_hamiltonian_super(h, tol=1e-10):
    """Commutator superoperator K(H) generating ``-i [H, rho]``."""
    h = np.asarray(h, dtype=np.complex128)
    defect = np.max(np.abs(h - dagger(h))) if h.size else 0.0
    if defect > tol:
        warnings.warn(
            f"Hamiltonian is not Hermitian (defect {defect:.3e})", stacklevel=2
        )
    ident = np.eye(h.shape[0], dtype=np.complex128)
    return -1j * (kron(h, ident) - kron(ident, np.conj(h)))


def build_generator(system, control_site, noise=None):
    """Assemble the Generator for a spin system, control site and noise."""
    h0 = build_drift(system)
    sx, sy = build_controls(system, control_site)
    collapse = build_collapse_ops(system, noise) if noise is not None else []
    jump, decay = _dissipator_parts(collapse, system.dim)
    return Generator(
        dissipator=jump + decay,
        drift_comm=assemble_hamiltonian_super(h0),
        control_comms=(
            assemble_hamiltonian_super(sx),
            assemble_hamiltonian_super(sy),
        ),
        dim=system.dim,
        jump_part=jump,
        decay_part=decay,
    )


def unitary_superoperator(u):
    """Conjugation superoperator ``rho -> U rho U^dag`` as ``U kron conj(U)``."""
    u = np.asarray(u, dtype=np.complex128)
    return kron(u, np.conj(u))


def target_superoperator(scenario):
    """Full-register target map: the target unitary extended by identity on
    the ancilla, turned into a conjugation superoperator."""
    return unitary_superoperator(scenario.full_target_unitary())


def step_propagator_exact(gen, hx, hy, dt):
    """One interval of exact evolution: ``expm(dt F(hx, hy))``."""
    if not dt > 0:
        raise ValueError("dt must be > 0")
    return _kernels.expm(dt * gen.at(hx, hy))


def total_propagator_exact(gen, pulses):
    """Exact propagator of the whole sequence; interval 0 acts first."""
    return _kernels.piecewise_total(
        gen.base, gen.control_comms[0], gen.control_comms[1],
        pulses.hx, pulses.hy, pulses.dt,
    )


def split_factors(gen, hx, hy, dt):
    """Per-interval splitting factors (decay, jump, coherent).

    The product ``A @ B @ C`` approximates the exact step to O(dt^2); only
    the coherent factor C depends on the controls.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    a = _kernels.expm(dt * gen.decay_part)
    b = _kernels.expm(dt * gen.jump_part)
    c = _kernels.expm(
        dt * (gen.drift_comm + hx * gen.control_comms[0] + hy * gen.control_comms[1])
    )
    return a, b, c


def split_propagator(gen, pulses):
    """Product of per-interval splitting factors, interval 0 first."""
    d2 = gen.dim * gen.dim
    ab = _kernels.expm(pulses.dt * gen.decay_part) @ _kernels.expm(
        pulses.dt * gen.jump_part
    )
    coherent = _kernels.piecewise_steps(
        gen.drift_comm, gen.control_comms[0], gen.control_comms[1],
        pulses.hx, pulses.hy, pulses.dt,
    )
    total = np.eye(d2, dtype=np.complex128)
    for k in range(pulses.num_pulses):
        total = ab @ coherent[k] @ total
    return total


def _coherent_eig(gen, hx, hy):
    """Eigendecomposition of the Hermitian commutator generator.

    ``K(H) = -i Hs`` with ``Hs = H kron I - I kron conj(H)`` Hermitian, so
    the coherent factor and its exact control derivative both come from the
    spectrum of Hs.
    """
    hs = 1j * (
        gen.drift_comm + hx * gen.control_comms[0] + hy * gen.control_comms[1]
    )
    return np.linalg.eigh(hs)


def _expm_divided_differences(theta):
    """Divided-difference table of exp at the points ``i * theta``.

    Entry (p, q) is ``(e^{i theta_p} - e^{i theta_q}) / (i (theta_p -
    theta_q))`` with the diagonal limit; evaluated in the stable
    product form ``e^{i mean} sinc(delta / 2)``.
    """
    mean = 0.5 * (theta[:, None] + theta[None, :])
    delta = 0.5 * (theta[:, None] - theta[None, :])
    return np.exp(1j * mean) * np.sinc(delta / np.pi)


def split_gradient(gen, pulses, target):
    """Fidelity of the split propagator and its exact gradient.

    Returns ``(f, grad)`` with ``grad[:M]`` the hx derivatives and
    ``grad[M:]`` the hy derivatives.  The only approximation relative to
    exact evolution is the splitting itself: the coherent factor is
    differentiated exactly through its eigendecomposition.
    """
    m = pulses.num_pulses
    d2 = gen.dim * gen.dim
    dt = pulses.dt
    norm = 1.0 / d2

    ab = _kernels.expm(dt * gen.decay_part) @ _kernels.expm(dt * gen.jump_part)
    hsx = 1j * gen.control_comms[0]
    hsy = 1j * gen.control_comms[1]

    steps = np.empty((m, d2, d2), dtype=np.complex128)
    eigs = []
    for k in range(m):
        w, v = _coherent_eig(gen, pulses.hx[k], pulses.hy[k])
        coherent = (v * np.exp(-1j * dt * w)) @ dagger(v)
        steps[k] = ab @ coherent
        eigs.append((w, v))

    # forward partial products: fwd[k] applies intervals 0..k-1
    fwd = np.empty((m + 1, d2, d2), dtype=np.complex128)
    fwd[0] = np.eye(d2)
    for k in range(m):
        fwd[k + 1] = steps[k] @ fwd[k]

    # back[k] = target^dag times the intervals after k
    back = np.empty((m, d2, d2), dtype=np.complex128) if m else None
    if m:
        back[m - 1] = dagger(target)
        for k in range(m - 2, -1, -1):
            back[k] = back[k + 1] @ steps[k + 1]

    fidelity = float(np.vdot(target, fwd[m]).real) * norm

    grad = np.empty(2 * m, dtype=np.float64)
    for k in range(m):
        w, v = eigs[k]
        phi = _expm_divided_differences(-dt * w)
        # trace against dC: Tr(P dC) = sum(Q^T * phi * (-i dt V^dag E V))
        q = dagger(v) @ (fwd[k] @ back[k] @ ab) @ v
        gx = dagger(v) @ hsx @ v
        gy = dagger(v) @ hsy @ v
        core = q.T * phi * (-1j * dt)
        grad[k] = np.sum(core * gx).real * norm
        grad[m + k] = np.sum(core * gy).real * norm
    return fidelity, grad


def machnes_gradient(gen, pulses, target):
    """Trace fidelity under exact evolution with the first-order gradient.

    The step derivative is approximated by ``-dt K(dH/dh) X_k``, which is
    valid for ``dt`` well below the inverse generator norm; a warning is
    emitted when the sequence sits outside that regime.
    """
    m = pulses.num_pulses
    d2 = gen.dim * gen.dim
    dt = pulses.dt
    norm = 1.0 / d2

    if m == 0:
        return float(np.vdot(target, np.eye(d2)).real) * norm, np.empty(0)

    h_peak = max(float(np.max(np.abs(pulses.hx))), float(np.max(np.abs(pulses.hy))))
    ok, bound = dt_validity_check(gen, h_peak, dt)
    if not ok:
        warnings.warn(
            f"dt = {dt:.3e} exceeds a tenth of the validity bound {bound:.3e}; "
            "the approximate gradient may be inaccurate",
            stacklevel=2,
        )

    steps = _kernels.piecewise_steps(
        gen.base, gen.control_comms[0], gen.control_comms[1],
        pulses.hx, pulses.hy, pulses.dt,
    )

    # fwd[k] includes interval k; back[k] = target^dag times intervals > k
    fwd = np.empty((m, d2, d2), dtype=np.complex128)
    fwd[0] = steps[0]
    for k in range(1, m):
        fwd[k] = steps[k] @ fwd[k - 1]
    back = np.empty((m, d2, d2), dtype=np.complex128)
    back[m - 1] = dagger(target)
    for k in range(m - 2, -1, -1):
        back[k] = back[k + 1] @ steps[k + 1]

    fidelity = float(np.vdot(target, fwd[m - 1]).real) * norm

    kxt = gen.control_comms[0].T.copy()
    kyt = gen.control_comms[1].T.copy()
    grad = np.empty(2 * m, dtype=np.float64)
    for k in range(m):
        y = fwd[k] @ back[k]
        grad[k] = -dt * norm * np.sum(kxt * y).real
        grad[m + k] = -dt * norm * np.sum(kyt * y).real
    return fidelity, grad


def dt_validity_check(gen, h_max, dt):
    """Check ``dt`` against the approximate-gradient validity bound.

    The bound is the inverse spectral norm of the generator at full control
    amplitude; the check passes when ``dt`` is at most a tenth of it.
    """
    worst = gen.at(h_max, h_max)
    norm = spectral_norm_upper(worst)
    bound = math.inf if norm == 0.0 else 1.0 / norm
    return dt <= bound / 10.0, bound


def superop_fidelity(a, target, n_qubits):
    """Trace fidelity ``Re Tr(target^dag a) / 2^(2N)`` of two superoperators."""
    a = np.asarray(a, dtype=np.complex128)
    target = np.asarray(target, dtype=np.complex128)
    d2 = 4**n_qubits
    if a.shape != (d2, d2) or target.shape != (d2, d2):
        raise ValueError(
            f"expected {(d2, d2)} superoperators, got {a.shape} and {target.shape}"
        )
    return float(np.vdot(target, a).real) / d2


def _reduced_channel_columns(x, n_qubits, ancilla_sites):
    """Images of all matrix units under the channel, ancilla traced out.

    Row basis index i runs over the d^2 matrix units E_i = unres(e_i);
    returns an (d^2, d_t, d_t) stack of reduced output matrices.
    """
    d = 2**n_qubits
    ancilla = set(ancilla_sites)
    keep = [s for s in range(n_qubits) if s not in ancilla]
    arr = np.ascontiguousarray(np.asarray(x, dtype=np.complex128).T).reshape(
        (d * d,) + (2,) * (2 * n_qubits)
    )
    batch = 2 * n_qubits
    row_idx = list(range(n_qubits))
    col_idx = [s if s in ancilla else n_qubits + s for s in range(n_qubits)]
    out_idx = [batch] + keep + [n_qubits + s for s in keep]
    reduced = np.einsum(arr, [batch] + row_idx + col_idx, out_idx)
    d_keep = 2 ** len(keep)
    return reduced.reshape(d * d, d_keep, d_keep)


def state_fitness(channel, scenario):
    """Average overlap between evolved and target states over all matrix
    units of the full register, the ancilla traced out after evolution.

    Normalized so any channel of the form ``rho -> (U_T kron W) rho
    (U_T kron W)^dag`` with unitary W on the ancilla scores exactly 1.
    """
    d = scenario.dim
    channel = np.asarray(channel, dtype=np.complex128)
    if channel.shape != (d * d, d * d):
        raise ValueError(
            f"channel has shape {channel.shape}, expected {(d * d, d * d)}"
        )
    n = scenario.num_qubits
    reduced = _reduced_channel_columns(channel, n, scenario.ancilla_sites)
    reduced_in = _reduced_channel_columns(
        np.eye(d * d, dtype=np.complex128), n, scenario.ancilla_sites
    )
    u = scenario.target_unitary
    targets = u @ reduced_in @ dagger(u)
    z = 2 ** (2 * len(scenario.target_sites) + len(scenario.ancilla_sites))
    return float(np.sum(np.conj(targets) * reduced).real) / z


def propagate_state(propagator, rho):
    """Apply a superoperator to a density matrix."""
    return unres(np.asarray(propagator) @ res(rho))
