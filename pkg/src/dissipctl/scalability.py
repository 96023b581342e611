"""Aggregation of per-term stability certificates.

A composite witness W = sum_t W_t (every W_t PSD) is certified from per-term
conditions plus a cross-channel scalability condition: channels not assigned
to a term must not push its generator positive.  Incremental variants certify
W_(n+1) = W_n + W_next given a certificate for the first n terms, with the
ground-energy ladder d_n entering the inequalities.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionCapError, DimensionMismatchError, PreconditionError
from .lindblad import (
    LindbladModel,
    Trajectory,
    dissipation_functional,
    dissipation_single_channel,
    evolve,
    generator,
    generator_single_channel,
)
from .linalg import (
    DEFAULT_TOL,
    TensorStructure,
    as_operator,
    commutator,
    dagger,
    is_psd,
    max_eigenvalue,
    min_eigenvalue,
    scaled_tol,
)
from .stability import _largest_constant, _smallest_positive_eig


@dataclass
class AggregateSpec:
    """Terms, channels, and the term-to-channel assignment of an aggregate."""

    structure: TensorStructure
    terms: list[np.ndarray]
    couplings: list[np.ndarray] = field(default_factory=list)
    assignment: list | None = None
    hamiltonian: np.ndarray | None = None
    term_names: list[str] | None = None

    def __post_init__(self):
        self.terms = [as_operator(t) for t in self.terms]
        self.couplings = [as_operator(l) for l in self.couplings]
        n = self.structure.total_dim
        for i, t in enumerate(self.terms):
            if t.shape[0] != n:
                raise DimensionMismatchError(f"term {i} dim {t.shape[0]} != {n}")
        for i, l in enumerate(self.couplings):
            if l.shape[0] != n:
                raise DimensionMismatchError(f"coupling {i} dim {l.shape[0]} != {n}")
        if self.hamiltonian is not None:
            self.hamiltonian = as_operator(self.hamiltonian)

    @property
    def n_terms(self) -> int:
        return len(self.terms)

    @property
    def n_channels(self) -> int:
        return len(self.couplings)

    def names(self) -> list[str]:
        if self.term_names:
            return list(self.term_names)
        return [f"W{i + 1}" for i in range(self.n_terms)]

    def channel_groups(self) -> list[list[int]]:
        """Channel indices assigned to each term (singletons by default)."""
        if self.assignment is None:
            if self.n_terms != self.n_channels:
                raise PreconditionError(
                    "assignment required when terms and channels do not pair one-to-one"
                )
            return [[i] for i in range(self.n_terms)]
        groups = []
        for entry in self.assignment:
            ks = [entry] if isinstance(entry, int) else list(entry)
            for k in ks:
                if not 0 <= k < self.n_channels:
                    raise PreconditionError(f"assignment index {k} out of range")
            groups.append([int(k) for k in ks])
        if len(groups) != self.n_terms:
            raise PreconditionError("assignment must name channels for every term")
        return groups

    def to_model(self) -> LindbladModel:
        h = self.hamiltonian
        if h is None:
            h = np.zeros((self.structure.total_dim,) * 2, dtype=complex)
        return LindbladModel(self.structure, h, list(self.couplings))

    def total(self) -> np.ndarray:
        acc = np.zeros((self.structure.total_dim,) * 2, dtype=complex)
        for t in self.terms:
            acc = acc + t
        return acc


@dataclass
class AggregateReport:
    """Per-term verdicts and the overall certification outcome."""

    mode: str
    per_term: list[dict]
    overall: bool
    d_total: float
    notes: list[str] = field(default_factory=list)
    d_ladder: list[float] | None = None
    cross_norm: float | None = None

    @property
    def constants(self) -> list[float | None]:
        return [entry.get("c") for entry in self.per_term]


def _require_terms_psd(spec: AggregateSpec, tol: float) -> None:
    for i, t in enumerate(spec.terms):
        if not is_psd(t, tol):
            raise PreconditionError(f"term {i} is not PSD")


def check_scalability_condition(spec: AggregateSpec, term_index: int, channel_index: int,
                                tol: float = DEFAULT_TOL) -> tuple[bool, float]:
    """Cross-channel condition: sum over channels other than `channel_index`
    of the single-channel generator of the term is <= 0.

    Returns (holds, margin) with margin = -(largest eigenvalue of the sum);
    an empty sum passes with margin 0.
    """
    if not 0 <= term_index < spec.n_terms:
        raise PreconditionError(f"term index {term_index} out of range")
    if not 0 <= channel_index < spec.n_channels:
        raise PreconditionError(f"channel index {channel_index} out of range")
    w = spec.terms[term_index]
    acc = np.zeros_like(w)
    for k, l in enumerate(spec.couplings):
        if k != channel_index:
            acc = acc + generator_single_channel(w, l)
    margin = -max_eigenvalue(acc)
    return margin >= -scaled_tol(acc, tol), float(margin)


def _best_group_constant(w: np.ndarray, gen_group: np.ndarray, tol: float) -> float | None:
    lam_plus = _smallest_positive_eig(w, tol)
    g_norm = float(np.linalg.norm(gen_group, 2))
    if lam_plus is None or g_norm == 0.0:
        return None
    c_max = 2.0 * g_norm / lam_plus
    return _largest_constant(lambda c: is_psd(-gen_group - c * w, tol), c_max)


def _cross_channel_margin(spec: AggregateSpec, w: np.ndarray, ks,
                          tol: float) -> tuple[bool, float]:
    """Scalability margin for a term against all channels outside its group."""
    acc = np.zeros_like(w)
    for k, l in enumerate(spec.couplings):
        if k not in ks:
            acc = acc + generator_single_channel(w, l)
    margin = -max_eigenvalue(acc)
    return margin >= -scaled_tol(acc, tol), float(margin)


def check_theorem_es_aggregation(spec: AggregateSpec, tol: float = DEFAULT_TOL) -> AggregateReport:
    """Per-term exponential certificates plus the scalability condition.

    Each term must satisfy (with its assigned channels) a per-term decay bound
    with some c > 0, and every term must pass the cross-channel condition.
    When all terms pass, the sum is certified asymptotically ground-state
    stable and is itself a valid stability witness.
    """
    _require_terms_psd(spec, tol)
    if not spec.terms:
        return AggregateReport(mode="es", per_term=[], overall=True, d_total=0.0,
                               notes=["no terms: vacuously stable"])
    groups = spec.channel_groups()
    names = spec.names()
    per_term = []
    overall = True
    for lam, (w, ks) in enumerate(zip(spec.terms, groups)):
        gen_group = np.zeros_like(w)
        for k in ks:
            gen_group = gen_group + generator_single_channel(w, spec.couplings[k])
        c = _best_group_constant(w, gen_group, tol) if ks else None
        scal_ok, margin = _cross_channel_margin(spec, w, ks, tol)
        ok = c is not None and scal_ok
        overall = overall and ok
        per_term.append({
            "term": names[lam], "channels": ks, "c": c,
            "scalability": scal_ok, "scalability_margin": margin, "certified": ok,
        })
    d_total = min_eigenvalue(spec.total())
    notes = []
    if overall:
        notes.append("aggregate certified: the sum is a valid stability witness")
    return AggregateReport(mode="es", per_term=per_term, overall=overall,
                           d_total=d_total, notes=notes)


def check_theorem_ds_aggregation(spec: AggregateSpec, tol: float = DEFAULT_TOL) -> AggregateReport:
    """Per-term dissipative certificates plus the scalability condition."""
    _require_terms_psd(spec, tol)
    if not spec.terms:
        return AggregateReport(mode="ds", per_term=[], overall=True, d_total=0.0,
                               notes=["no terms: vacuously stable"])
    groups = spec.channel_groups()
    names = spec.names()
    per_term = []
    overall = True
    for lam, (w, ks) in enumerate(zip(spec.terms, groups)):
        gen_group = np.zeros_like(w)
        diss_group = np.zeros_like(w)
        for k in ks:
            gen_group = gen_group + generator_single_channel(w, spec.couplings[k])
            diss_group = diss_group + dissipation_single_channel(w, spec.couplings[k])
        gen_ok = is_psd(-gen_group, tol)
        c = None
        if gen_ok and ks:
            lam_plus = _smallest_positive_eig(w, tol)
            d_norm = float(np.linalg.norm(diss_group, 2))
            if lam_plus is not None and d_norm > 0.0:
                c = _largest_constant(lambda cc: is_psd(diss_group - cc * w, tol),
                                      2.0 * d_norm / lam_plus)
        scal_ok, margin = _cross_channel_margin(spec, w, ks, tol)
        ok = gen_ok and c is not None and scal_ok
        overall = overall and ok
        per_term.append({
            "term": names[lam], "channels": ks, "c": c, "generator_nonpositive": gen_ok,
            "scalability": scal_ok, "scalability_margin": margin, "certified": ok,
        })
    d_total = min_eigenvalue(spec.total())
    notes = []
    if overall:
        notes.append("aggregate satisfies the dissipative condition")
    return AggregateReport(mode="ds", per_term=per_term, overall=overall,
                           d_total=d_total, notes=notes)


def _partial_sums(spec: AggregateSpec, n: int) -> tuple[np.ndarray, np.ndarray, float, float]:
    if not 1 <= n < spec.n_terms:
        raise PreconditionError(f"n must satisfy 1 <= n < {spec.n_terms}, got {n}")
    w_n = sum(spec.terms[:n])
    w_next = spec.terms[n]
    d_n = min_eigenvalue(w_n)
    d_next = min_eigenvalue(w_n + w_next)
    return w_n, w_next, d_n, d_next


def _extended_model(spec: AggregateSpec, new_couplings) -> LindbladModel:
    h = spec.hamiltonian
    if h is None:
        h = np.zeros((spec.structure.total_dim,) * 2, dtype=complex)
    return LindbladModel(spec.structure, h,
                         list(spec.couplings) + [as_operator(l) for l in new_couplings])


def _verify_prior_es(spec: AggregateSpec, w_n: np.ndarray, d_n: float, c: float,
                     tol: float) -> None:
    prior = spec.to_model()
    g = generator(w_n, prior)
    shifted = w_n - d_n * np.eye(w_n.shape[0])
    if max_eigenvalue(g + c * shifted) > scaled_tol(g, max(tol, 1e-8)):
        raise PreconditionError(
            f"prior certificate missing: existing channels do not give the decay bound at c={c}"
        )


def _verify_prior_ds(spec: AggregateSpec, w_n: np.ndarray, d_n: float, c: float,
                     tol: float) -> None:
    prior = spec.to_model()
    g = generator(w_n, prior)
    if not is_psd(-g, max(tol, 1e-8)):
        raise PreconditionError("prior certificate missing: generator not non-positive")
    d_op = dissipation_functional(w_n, prior)
    shifted = w_n - d_n * np.eye(w_n.shape[0])
    if min_eigenvalue(d_op - c * shifted) < -scaled_tol(d_op, max(tol, 1e-8)):
        raise PreconditionError(
            f"prior certificate missing: dissipation bound fails at c={c}"
        )


def check_incremental_es(spec: AggregateSpec, n: int, new_couplings, c: float,
                         tol: float = DEFAULT_TOL) -> tuple[bool, dict]:
    """Exponential certificate for the (n+1)-term partial sum.

    Requires the recorded certificate for the first n terms (verified here),
    then checks
        G(W_next) + sum_new G(W_n)_L  <=  -c W_next + c (d_(n+1) - d_n).
    """
    _require_terms_psd(spec, tol)
    w_n, w_next, d_n, d_next = _partial_sums(spec, n)
    _verify_prior_es(spec, w_n, d_n, c, tol)
    full = _extended_model(spec, new_couplings)
    lhs = generator(w_next, full)
    for l in new_couplings:
        lhs = lhs + generator_single_channel(w_n, as_operator(l))
    rhs = -c * w_next + c * (d_next - d_n) * np.eye(w_next.shape[0])
    margin = -max_eigenvalue(lhs - rhs)
    holds = margin >= -scaled_tol(lhs, tol)
    info = {"margin": float(margin), "d_n": d_n, "d_next": d_next,
            "d_ladder_ok": d_next >= d_n - scaled_tol(w_n, tol)}
    return holds, info


def check_incremental_ds(spec: AggregateSpec, n: int, new_couplings, c: float,
                         tol: float = DEFAULT_TOL) -> tuple[bool, dict]:
    """Dissipative certificate for the (n+1)-term partial sum.

    Checks the generator condition and the cross-term inequality
        D(W_next) + 2 sum_k Re([L_k', W_n][W_next, L_k])
            >= c W_next - c (d_(n+1) - d_n),
    where Re(M) = (M + M')/2.  The cross-term norm is reported separately.
    """
    _require_terms_psd(spec, tol)
    w_n, w_next, d_n, d_next = _partial_sums(spec, n)
    _verify_prior_ds(spec, w_n, d_n, c, tol)
    full = _extended_model(spec, new_couplings)
    gen_lhs = generator(w_next, full)
    for l in new_couplings:
        gen_lhs = gen_lhs + generator_single_channel(w_n, as_operator(l))
    gen_margin = -max_eigenvalue(gen_lhs)
    gen_ok = gen_margin >= -scaled_tol(gen_lhs, tol)

    cross = np.zeros_like(w_next)
    for l in full.couplings:
        ld = dagger(l)
        m = (ld @ w_n - w_n @ ld) @ (w_next @ l - l @ w_next)
        cross = cross + (m + dagger(m))  # 2 Re(M)
    diss_lhs = dissipation_functional(w_next, full) + cross
    rhs = c * w_next - c * (d_next - d_n) * np.eye(w_next.shape[0])
    diss_margin = min_eigenvalue(diss_lhs - rhs)
    diss_ok = diss_margin >= -scaled_tol(diss_lhs, tol)
    info = {
        "generator_margin": float(gen_margin), "dissipation_margin": float(diss_margin),
        "cross_norm": float(np.linalg.norm(cross, 2)),
        "d_n": d_n, "d_next": d_next,
        "d_ladder_ok": d_next >= d_n - scaled_tol(w_n, tol),
    }
    return gen_ok and diss_ok, info


def check_corollary_d_free(spec: AggregateSpec, n: int, new_couplings, c: float,
                           mode: str = "es", tol: float = DEFAULT_TOL) -> tuple[bool, dict]:
    """Ground-energy-free sufficient conditions for the incremental step.

    The d-dependent right-hand sides are dropped (the ladder d_(n+1) >= d_n
    makes these strictly stronger than the incremental checks).
    """
    _require_terms_psd(spec, tol)
    w_n, w_next, d_n, d_next = _partial_sums(spec, n)
    full = _extended_model(spec, new_couplings)
    if mode == "es":
        _verify_prior_es(spec, w_n, d_n, c, tol)
        lhs = generator(w_next, full)
        for l in new_couplings:
            lhs = lhs + generator_single_channel(w_n, as_operator(l))
        margin = -max_eigenvalue(lhs + c * w_next)
        holds = margin >= -scaled_tol(lhs, tol)
        return holds, {"margin": float(margin), "d_n": d_n, "d_next": d_next}
    if mode == "ds":
        _verify_prior_ds(spec, w_n, d_n, c, tol)
        cross = np.zeros_like(w_next)
        for l in full.couplings:
            ld = dagger(l)
            m = (ld @ w_n - w_n @ ld) @ (w_next @ l - l @ w_next)
            cross = cross + (m + dagger(m))
        lhs = dissipation_functional(w_next, full) + cross
        margin = min_eigenvalue(lhs - c * w_next)
        holds = margin >= -scaled_tol(lhs, tol)
        return holds, {"margin": float(margin), "cross_norm": float(np.linalg.norm(cross, 2)),
                       "d_n": d_n, "d_next": d_next}
    raise PreconditionError(f"mode must be 'es' or 'ds', got {mode!r}")


def check_corollary_commuting(spec: AggregateSpec, unitaries, mode: str = "es",
                              tol: float = DEFAULT_TOL) -> AggregateReport:
    """Commuting-family certificate for couplings of the form L_k = U_k W_k.

    Verifies [W_a, W_b] = 0 for all pairs, [U_k, W_t] = 0 whenever channel k
    is not assigned to term t, and the per-term condition in the requested
    mode.  A failing commutation pair is reported with guidance to evaluate
    the scalability condition directly.
    """
    _require_terms_psd(spec, tol)
    unitaries = [as_operator(u) for u in unitaries]
    if len(unitaries) != spec.n_channels:
        raise PreconditionError("one unitary per channel is required")
    groups = spec.channel_groups()
    names = spec.names()
    notes: list[str] = []
    commuting_ok = True
    for a in range(spec.n_terms):
        for b in range(a + 1, spec.n_terms):
            defect = float(np.linalg.norm(commutator(spec.terms[a], spec.terms[b])))
            if defect > scaled_tol(spec.terms[a], tol) * max(1.0, float(np.linalg.norm(spec.terms[b]))):
                commuting_ok = False
                notes.append(f"terms {names[a]} and {names[b]} do not commute (norm {defect:.3e})")
    for t, ks in enumerate(groups):
        for k, u in enumerate(unitaries):
            if k in ks:
                continue
            defect = float(np.linalg.norm(commutator(u, spec.terms[t])))
            if defect > scaled_tol(u, tol) * max(1.0, float(np.linalg.norm(spec.terms[t]))):
                commuting_ok = False
                notes.append(
                    f"commutation clause fails for (U[{k}], {names[t]}) "
                    f"(norm {defect:.3e}); rerun with --theorem es"
                )
    base = check_theorem_es_aggregation(spec, tol) if mode == "es" \
        else check_theorem_ds_aggregation(spec, tol)
    per_term = base.per_term
    per_term_ok = all(e["c"] is not None for e in per_term)
    overall = commuting_ok and per_term_ok
    if overall:
        notes.append("commuting-family certificate holds; aggregate ground-state stable")
    return AggregateReport(mode=f"commuting-{mode}", per_term=per_term, overall=overall,
                           d_total=base.d_total, notes=notes)


def dissipation_cross_term(spec: AggregateSpec) -> np.ndarray:
    """D(sum W_t) - sum_t D(W_t): the cross part of the dissipation operator."""
    model = spec.to_model()
    total = dissipation_functional(spec.total(), model)
    for w in spec.terms:
        total = total - dissipation_functional(w, model)
    return total


def simulate_aggregate(spec: AggregateSpec, t_final: float, *,
                       rho0: np.ndarray | None = None, dim_cap: int = 64,
                       n_samples: int = 201, rtol: float = 1e-9,
                       atol: float = 1e-9) -> Trajectory:
    """Evolve the full model and record the total and per-term expectations.

    Additivity of the mean, <W> = sum_t <W_t>, is asserted on the emitted
    samples.  Runs regardless of certification status (diagnosis tool).
    """
    n = spec.structure.total_dim
    if n > dim_cap:
        raise DimensionCapError(f"aggregate dim {n} exceeds cap {dim_cap}")
    model = spec.to_model()
    if rho0 is None:
        rho0 = np.eye(n, dtype=complex) / n
    names = spec.names()
    observables = {"W": spec.total()}
    for name, w in zip(names, spec.terms):
        observables[name] = w
    traj = evolve(model, rho0, t_final, observables=observables,
                  n_samples=n_samples, rtol=rtol, atol=atol)
    total = sum(traj.observables[name] for name in names)
    if not np.allclose(total, traj.observables["W"], atol=1e-10):
        raise AssertionError("per-term expectations do not add up to the total")
    return traj
