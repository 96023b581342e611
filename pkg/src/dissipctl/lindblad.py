"""Markovian open-system dynamics: generator, dissipation functional,
master-equation integration, and the fast-ancilla elimination check.

Conventions (hbar = 1):

* Heisenberg drift   G(X) = -i[X, H] + sum_k L_k' X L_k - (1/2){L_k' L_k, X}
* state evolution    drho/dt = -i[H, rho] + sum_k L_k rho L_k' - (1/2){L_k' L_k, rho}

where a prime denotes the adjoint.  Couplings carry units sqrt(rate).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CommutationError,
    DimensionCapError,
    DimensionMismatchError,
    IntegrationError,
    NonHermitianError,
    PreconditionError,
    StateValidityError,
)
from .linalg import (
    DEFAULT_TOL,
    SIGMA_MINUS,
    SIGMA_PLUS,
    TensorStructure,
    as_operator,
    dagger,
    expm,
    hermitian_part,
    is_hermitian,
    scaled_tol,
    unvec,
    vec,
)


@dataclass
class LindbladModel:
    """A finite-level open system: Hamiltonian plus coupling operators."""

    structure: TensorStructure
    hamiltonian: np.ndarray
    couplings: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        self.hamiltonian = as_operator(self.hamiltonian)
        self.couplings = [as_operator(l) for l in self.couplings]
        self.validate()

    @property
    def dim(self) -> int:
        return self.structure.total_dim

    def validate(self, tol: float = DEFAULT_TOL) -> None:
        n = self.dim
        if self.hamiltonian.shape[0] != n:
            raise DimensionMismatchError(
                f"hamiltonian dim {self.hamiltonian.shape[0]} != structure dim {n}"
            )
        if not is_hermitian(self.hamiltonian, tol):
            raise NonHermitianError("hamiltonian must be Hermitian")
        for i, l in enumerate(self.couplings):
            if l.shape[0] != n:
                raise DimensionMismatchError(f"coupling {i} dim {l.shape[0]} != {n}")


def maximally_mixed(n: int) -> np.ndarray:
    return np.eye(n, dtype=complex) / n


def validate_density_state(rho: np.ndarray, tol: float = DEFAULT_TOL) -> None:
    """Hermitian, unit trace and PSD within tolerance; raises otherwise."""
    rho = as_operator(rho)
    if not is_hermitian(rho, tol):
        raise StateValidityError("density matrix is not Hermitian")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > scaled_tol(rho, tol):
        raise StateValidityError(f"trace {tr:.12g} differs from 1")
    w = np.linalg.eigvalsh(hermitian_part(rho))
    if w[0] < -tol * max(1.0, float(np.abs(w).max())):
        raise StateValidityError(f"smallest eigenvalue {w[0]:.3e} below -tol")


def generator_single_channel(x: np.ndarray, coupling: np.ndarray) -> np.ndarray:
    """Single-channel drift L' X L - (1/2){L'L, X}."""
    x, l = as_operator(x), as_operator(coupling)
    if x.shape != l.shape:
        raise DimensionMismatchError(f"shapes {x.shape} and {l.shape} differ")
    ld = dagger(l)
    ldl = ld @ l
    return ld @ x @ l - 0.5 * (ldl @ x + x @ ldl)


def generator(x: np.ndarray, model: LindbladModel, assume_commuting: bool = False,
              tol: float = DEFAULT_TOL) -> np.ndarray:
    """Heisenberg-picture drift of the observable ``x``.

    With ``assume_commuting`` the commutator [x, H] is verified to vanish and
    the Hamiltonian term is dropped.
    """
    x = as_operator(x)
    if not is_hermitian(x, tol):
        raise NonHermitianError("generator is defined here for Hermitian observables")
    h = model.hamiltonian
    if x.shape != h.shape:
        raise DimensionMismatchError(f"observable dim {x.shape[0]} != model dim {h.shape[0]}")
    comm = x @ h - h @ x
    if assume_commuting:
        if np.linalg.norm(comm) > scaled_tol(x, tol) * max(1.0, float(np.linalg.norm(h))):
            raise CommutationError(
                f"[x, H] != 0 (norm {np.linalg.norm(comm):.3e}) but assume_commuting was set"
            )
        out = np.zeros_like(x)
    else:
        out = -1j * comm
    for l in model.couplings:
        out = out + generator_single_channel(x, l)
    return out


def dissipation_single_channel(x: np.ndarray, coupling: np.ndarray) -> np.ndarray:
    """[L', x][x, L] for one channel; PSD for Hermitian x."""
    x, l = as_operator(x), as_operator(coupling)
    ld = dagger(l)
    return (ld @ x - x @ ld) @ (x @ l - l @ x)


def dissipation_functional(x: np.ndarray, model: LindbladModel,
                           tol: float = DEFAULT_TOL) -> np.ndarray:
    """Energy-dissipation operator sum_k [L_k', x][x, L_k]."""
    x = as_operator(x)
    if not is_hermitian(x, tol):
        raise NonHermitianError("dissipation functional requires a Hermitian observable")
    out = np.zeros_like(x)
    for l in model.couplings:
        out = out + dissipation_single_channel(x, l)
    return out


def liouvillian(model: LindbladModel) -> np.ndarray:
    """Matrix of the state-evolution map on column-stacked density matrices."""
    n = model.dim
    eye = np.eye(n, dtype=complex)
    h = model.hamiltonian
    lam = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for l in model.couplings:
        ld = dagger(l)
        ldl = ld @ l
        lam = lam + np.kron(l.conj(), l) \
            - 0.5 * (np.kron(eye, ldl) + np.kron(ldl.T, eye))
    return lam


def expectation(x: np.ndarray, rho: np.ndarray, tol: float = DEFAULT_TOL) -> float:
    """Mean value tr(x rho) of a Hermitian observable."""
    x, rho = as_operator(x), as_operator(rho)
    if x.shape != rho.shape:
        raise DimensionMismatchError(f"shapes {x.shape} and {rho.shape} differ")
    if not is_hermitian(x, tol):
        raise NonHermitianError("expectation requires a Hermitian observable")
    val = complex(np.trace(x @ rho))
    return float(val.real)


def stationary_state(model: LindbladModel, tol: float = 1e-8) -> np.ndarray:
    """A stationary density matrix, from the kernel of the Liouvillian."""
    lam = liouvillian(model)
    w, v = np.linalg.eig(lam)
    idx = int(np.argmin(np.abs(w)))
    rho = unvec(v[:, idx], model.dim)
    rho = hermitian_part(rho)
    tr = float(np.trace(rho).real)
    if abs(tr) < 1e-12:
        raise PreconditionError("kernel vector is traceless; stationary state not isolated")
    rho = rho / tr
    if not is_stationary(model, rho, tol):
        raise PreconditionError("no stationary state found within tolerance")
    return rho


def is_stationary(model: LindbladModel, rho: np.ndarray, tol: float = 1e-8) -> bool:
    """||Lambda vec(rho)|| <= tol * ||Lambda|| declares stationarity."""
    lam = liouvillian(model)
    return float(np.linalg.norm(lam @ vec(rho))) <= tol * max(1.0, float(np.linalg.norm(lam)))


# -- trajectories -------------------------------------------------------------


@dataclass
class Trajectory:
    """Sampled solution of the master equation with named expectation series."""

    times: np.ndarray
    states: list[np.ndarray]
    observables: dict[str, np.ndarray] = field(default_factory=dict)

    def traces(self) -> np.ndarray:
        return np.array([float(np.trace(r).real) for r in self.states])

    def purities(self) -> np.ndarray:
        return np.array([float(np.trace(r @ r).real) for r in self.states])

    def final_state(self) -> np.ndarray:
        return self.states[-1]


# Dormand-Prince 5(4) tableau.
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_DP_E = _DP_B5 - _DP_B4


def _rhs_factory(model: LindbladModel):
    h = model.hamiltonian
    pairs = [(l, dagger(l)) for l in model.couplings]
    ldls = [ld @ l for l, ld in pairs]

    def rhs(rho: np.ndarray) -> np.ndarray:
        out = -1j * (h @ rho - rho @ h)
        for (l, ld), ldl in zip(pairs, ldls):
            out = out + l @ rho @ ld - 0.5 * (ldl @ rho + rho @ ldl)
        return out

    return rhs


def _rk45_segment(rhs, rho, t0, t1, h, rtol, atol):
    """Integrate from t0 to t1, hermitizing after every accepted step."""
    t = t0
    k = [None] * 7
    k[0] = rhs(rho)
    while t < t1 - 1e-15 * max(1.0, abs(t1)):
        h = min(h, t1 - t)
        if h < 1e-14 * max(1.0, abs(t1)):
            raise IntegrationError(f"step size underflow at t={t:.6g}")
        for i in range(1, 7):
            acc = rho + h * sum(a * k[j] for j, a in enumerate(_DP_A[i]))
            k[i] = rhs(acc)
        err_mat = h * sum(e * k[i] for i, e in enumerate(_DP_E) if e != 0.0)
        rho_new = rho + h * sum(b * k[i] for i, b in enumerate(_DP_B5) if b != 0.0)
        scale = atol + rtol * np.maximum(np.abs(rho), np.abs(rho_new))
        err = float(np.sqrt(np.mean(np.abs(err_mat / scale) ** 2)))
        if err <= 1.0:
            t += h
            rho = hermitian_part(rho_new)
            k[0] = rhs(rho)
        factor = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        h = h * factor
    return rho, h


def evolve(model: LindbladModel, rho0: np.ndarray, t_final: float,
           dt_hint: float | None = None, *, observables: dict[str, np.ndarray] | None = None,
           n_samples: int | None = None, rtol: float = 1e-9, atol: float = 1e-9,
           validate: bool = True) -> Trajectory:
    """Adaptive RK45 integration of the master equation.

    Emits ``n_samples`` equally spaced states (derived from ``dt_hint`` when
    given) and re-validates every emitted state against the density-matrix
    invariants at 10x the base tolerance.
    """
    model.validate()
    rho0 = as_operator(rho0)
    if rho0.shape[0] != model.dim:
        raise DimensionMismatchError(f"state dim {rho0.shape[0]} != model dim {model.dim}")
    if t_final <= 0:
        raise PreconditionError(f"t_final must be positive, got {t_final}")
    validate_density_state(rho0, DEFAULT_TOL * 10)
    if n_samples is None:
        n_samples = int(round(t_final / dt_hint)) + 1 if dt_hint else 201
    if n_samples < 2:
        raise PreconditionError("need at least two sample points")
    times = np.linspace(0.0, float(t_final), n_samples)
    rhs = _rhs_factory(model)
    h = dt_hint if dt_hint else t_final / 100.0

    states = [rho0.copy()]
    rho = rho0.copy()
    for i in range(1, n_samples):
        rho, h = _rk45_segment(rhs, rho, times[i - 1], times[i], h, rtol, atol)
        if validate:
            try:
                validate_density_state(rho, DEFAULT_TOL * 10)
            except StateValidityError as exc:
                raise StateValidityError(f"at t={times[i]:.6g}: {exc}") from exc
        states.append(rho.copy())

    series: dict[str, np.ndarray] = {}
    if observables:
        for name, op in observables.items():
            series[name] = np.array([expectation(op, r) for r in states])
    return Trajectory(times=times, states=states, observables=series)


def propagate_sampled(model: LindbladModel, rho0: np.ndarray, times: np.ndarray,
                      rtol: float = 1e-9, atol: float = 1e-9) -> list[np.ndarray]:
    """States at the given equally spaced times.

    Uses exponential stepping of the Liouvillian for dim <= 16 (exact up to
    expm accuracy) and falls back to RK45 above that.
    """
    times = np.asarray(times, dtype=float)
    n = model.dim
    if n <= 16:
        dt = float(times[1] - times[0])
        if not np.allclose(np.diff(times), dt, rtol=0, atol=1e-12 * max(1.0, dt)):
            raise PreconditionError("exponential stepping needs an equally spaced grid")
        step = expm(liouvillian(model), dt)
        v = vec(rho0)
        out = []
        for _ in times:
            out.append(hermitian_part(unvec(v, n)))
            v = step @ v
        return out
    traj = evolve(model, rho0, float(times[-1]), n_samples=len(times), rtol=rtol, atol=atol)
    return traj.states


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    w = np.linalg.eigvalsh(hermitian_part(as_operator(a) - as_operator(b)))
    return 0.5 * float(np.abs(w).sum())


def partial_trace_last(rho: np.ndarray, dim_keep: int, dim_drop: int) -> np.ndarray:
    r = as_operator(rho).reshape(dim_keep, dim_drop, dim_keep, dim_drop)
    return np.einsum("iaja->ij", r)


# -- fast-ancilla (adiabatic) elimination check -------------------------------


@dataclass
class AdiabaticReport:
    """Sup-over-time trace-distance error between the ancilla-mediated model
    and its fast-decay limit, per scaling factor k."""

    k_values: list[int]
    errors: list[float]
    monotone_tail: bool


def adiabatic_limit_check(model: LindbladModel, omega: float, gamma: float,
                          k_list, t_final: float, *, rho0: np.ndarray | None = None,
                          n_samples: int = 201, joint_dim_cap: int = 64) -> AdiabaticReport:
    """Compare ancilla-mediated dynamics against the fast-decay limit.

    For each scaling factor k, the system is joined with a decaying ancilla
    qubit via H_k = k*omega*(L sp + L' sm) + H_S and ancilla coupling
    k*sqrt(gamma)*sm; the ancilla is traced out and the reduced dynamics is
    compared with the limit model whose coupling is -(2*omega/sqrt(gamma))*L,
    the second-order effective operator of the fast-decay limit.  Errors
    should decrease along the upper half of ``k_list``.
    """
    if len(model.couplings) != 1:
        raise PreconditionError("adiabatic check needs a single designated coupling")
    k_list = [int(k) for k in k_list]
    if any(k2 <= k1 for k1, k2 in zip(k_list, k_list[1:])):
        raise PreconditionError("k_list must be strictly ascending")
    n = model.dim
    if 2 * n > joint_dim_cap:
        raise DimensionCapError(f"joint dimension {2 * n} exceeds cap {joint_dim_cap}")
    l_sys = model.couplings[0]
    h_sys = model.hamiltonian
    if rho0 is None:
        rho0 = maximally_mixed(n)
    rho0 = as_operator(rho0)
    times = np.linspace(0.0, float(t_final), n_samples)

    limit_coupling = -(2.0 * omega / np.sqrt(gamma)) * l_sys
    limit_model = LindbladModel(model.structure, h_sys, [limit_coupling])
    limit_states = propagate_sampled(limit_model, rho0, times)

    anc_ground = np.zeros((2, 2), dtype=complex)
    anc_ground[1, 1] = 1.0
    joint_structure = TensorStructure(tuple(model.structure.dims) + (2,))
    eye2 = np.eye(2, dtype=complex)

    errors = []
    for k in k_list:
        h_joint = k * omega * (np.kron(l_sys, SIGMA_PLUS) + np.kron(dagger(l_sys), SIGMA_MINUS)) \
            + np.kron(h_sys, eye2)
        l_joint = k * np.sqrt(gamma) * np.kron(np.eye(n, dtype=complex), SIGMA_MINUS)
        joint_model = LindbladModel(joint_structure, h_joint, [l_joint])
        joint_states = propagate_sampled(joint_model, np.kron(rho0, anc_ground), times)
        err = max(
            trace_distance(partial_trace_last(js, n, 2), ls)
            for js, ls in zip(joint_states, limit_states)
        )
        errors.append(float(err))

    half = len(k_list) // 2
    tail = errors[max(half - 1, 0):]
    monotone = all(b <= a * (1 + 1e-12) for a, b in zip(tail, tail[1:]))
    return AdiabaticReport(k_values=k_list, errors=errors, monotone_tail=monotone)
