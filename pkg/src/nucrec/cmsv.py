"""Estimators for the extremal ratios ||A(X)||_2 / ||X||_F over
nuclear-norm-constrained and rank-constrained unit-Frobenius matrices,
together with a brute-force sampling oracle for tiny instances and the
derived restricted-isometry-constant bound.

All estimates are one-sided evidence: any feasible witness upper-bounds an
infimum and lower-bounds a supremum.  Witness feasibility is re-verified on
every returned estimate.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from nucrec.linalg import svd, lstar_rank, numerical_rank
from nucrec.operators import apply_op, gram_apply
from nucrec.solvers import SolverConfig, power_iteration_gram_norm
from nucrec.ensembles import derive_seed


@dataclass(frozen=True)
class CmsvEstimate:
    """One-sided estimate of a nuclear-norm-constrained extremal singular value.

    ``evidence`` records the estimate's direction of validity:
    'upper_bound_on_min' for direction='min', 'lower_bound_on_max' for
    direction='max'.
    """

    tau: float
    direction: str
    value: float
    witness: np.ndarray
    starts: int
    per_start_values: tuple = ()
    evidence: str = ""

    def __post_init__(self):
        if self.direction not in ("min", "max"):
            raise ValueError("direction must be 'min' or 'max'")
        expected = "upper_bound_on_min" if self.direction == "min" else "lower_bound_on_max"
        object.__setattr__(self, "evidence", expected)
        w = np.asarray(self.witness, dtype=float)
        if abs(np.linalg.norm(w) - 1.0) > 1e-9:
            raise ValueError("witness must have unit Frobenius norm")
        if lstar_rank(w) > self.tau * (1 + 1e-9):
            raise ValueError("witness violates the nuclear-norm-ratio constraint")


@dataclass(frozen=True)
class RcsvEstimate:
    """One-sided estimate of a rank-constrained extremal singular value."""

    r: int
    direction: str
    value: float
    witness: np.ndarray
    starts: int
    per_start_values: tuple = ()
    evidence: str = ""

    def __post_init__(self):
        if self.direction not in ("min", "max"):
            raise ValueError("direction must be 'min' or 'max'")
        expected = "upper_bound_on_min" if self.direction == "min" else "lower_bound_on_max"
        object.__setattr__(self, "evidence", expected)
        w = np.asarray(self.witness, dtype=float)
        if abs(np.linalg.norm(w) - 1.0) > 1e-9:
            raise ValueError("witness must have unit Frobenius norm")
        if numerical_rank(w, 1e-9) > self.r:
            raise ValueError("witness violates the rank constraint")


def _project_sigma(sigma, tau):
    """Project a nonnegative singular value vector onto
    {s >= 0, ||s||_2 = 1, ||s||_1 <= sqrt(tau)}, maximizing alignment
    with ``sigma``.

    Normalizes to unit l2; when the l1 constraint is active, soft-thresholds
    at a level found by bisection so the normalized vector has l1 norm
    exactly sqrt(tau).
    """
    target = np.sqrt(tau)
    nrm = np.linalg.norm(sigma)
    if nrm == 0.0:
        raise ValueError("zero singular value vector")
    s = sigma / nrm
    if np.sum(s) <= target * (1 + 1e-15):
        return s
    lo, hi = 0.0, float(np.max(s))
    for _ in range(200):
        theta = 0.5 * (lo + hi)
        sh = np.maximum(s - theta, 0.0)
        l2 = np.linalg.norm(sh)
        if l2 == 0.0:
            hi = theta
            continue
        if np.sum(sh) / l2 > target:
            lo = theta
        else:
            hi = theta
    sh = np.maximum(s - hi, 0.0)
    return sh / np.linalg.norm(sh)


def _project_sigma_batch(sigmas, tau):
    """Vectorized version of :func:`_project_sigma` over rows of ``sigmas``."""
    target = np.sqrt(tau)
    s = sigmas / np.linalg.norm(sigmas, axis=1, keepdims=True)
    need = np.sum(s, axis=1) > target
    if np.any(need):
        sub = s[need]
        lo = np.zeros(len(sub))
        hi = np.max(sub, axis=1)
        for _ in range(100):
            theta = 0.5 * (lo + hi)
            sh = np.maximum(sub - theta[:, None], 0.0)
            l2 = np.linalg.norm(sh, axis=1)
            ratio = np.where(l2 > 0, np.sum(sh, axis=1) / np.where(l2 > 0, l2, 1.0), 0.0)
            high = ratio > target
            lo = np.where(high, theta, lo)
            hi = np.where(high, hi, theta)
        sh = np.maximum(sub - hi[:, None], 0.0)
        s[need] = sh / np.linalg.norm(sh, axis=1, keepdims=True)
    return s


def _check_tau(op, tau):
    n_min = min(op.shape)
    if not 1.0 <= tau <= n_min + 1e-12:
        raise ValueError(f"tau={tau} out of range [1, {n_min}]")


def project_htau(x, tau):
    """Retract ``x`` onto the unit-Frobenius sphere intersected with the
    nuclear-norm ball ||X||_*^2 <= tau.

    Operates on the singular value vector (alignment-optimal for fixed
    singular subspaces); output satisfies both constraints to 1e-9.
    """
    x = np.asarray(x, dtype=float)
    n_min = min(x.shape)
    if not 1.0 <= tau <= n_min + 1e-12:
        raise ValueError(f"tau={tau} out of range [1, {n_min}]")
    f = svd(x)
    s = _project_sigma(f.sigma, tau)
    return (f.u * s) @ f.v.T


def _witness_values(op, batch):
    """||A(X)||_2 for a batch of matrices, shape (b, n1, n2) -> (b,)."""
    meas = np.tensordot(batch, op.matrices, axes=([1, 2], [1, 2]))
    return np.linalg.norm(meas, axis=1)


def estimate_cmsv(op, tau, direction, starts=32, seed=0, cfg=None, max_iters=None):
    """Multi-start projected gradient estimate of the constrained extremal
    singular value.

    Descends (direction='min') or ascends ('max') the squared measurement
    norm with the fixed scale-equivariant step 1/(2*lambda_max(Gram)),
    retracting onto the feasible set after each step.  Ties across starts
    resolve to the lowest start index.
    """
    _check_tau(op, tau)
    if direction not in ("min", "max"):
        raise ValueError("direction must be 'min' or 'max'")
    if starts < 1:
        raise ValueError("starts must be >= 1")
    cfg = cfg or SolverConfig()
    lam = power_iteration_gram_norm(op)
    n1, n2 = op.shape
    sign = -1.0 if direction == "min" else 1.0
    if max_iters is None:
        # short default budget: each sweep is a full batched step, and
        # Monte Carlo callers run many estimates
        max_iters = min(cfg.max_iters, 300)
    mats = op.matrices

    def retract(batch):
        u, s, vt = np.linalg.svd(batch, full_matrices=False)
        s = _project_sigma_batch(s, tau)
        return np.einsum("bij,bj,bjk->bik", u, s, vt)

    # starts run in lockstep as one batch; updates are independent per start
    x0 = np.stack(
        [
            np.random.Generator(np.random.Philox(np.random.SeedSequence(derive_seed(seed, k))))
            .standard_normal((n1, n2))
            for k in range(starts)
        ]
    )
    x = retract(x0)
    if lam > 0.0:
        step = 1.0 / (2.0 * lam)
        vals = _witness_values(op, x)
        for _ in range(max_iters):
            meas = np.tensordot(x, mats, axes=([1, 2], [1, 2]))  # (b, m)
            grad = 2.0 * np.tensordot(meas, mats, axes=([1], [0]))
            stepped = x + sign * step * grad
            # a descent step can annihilate an iterate when the operator acts
            # as a multiple of the identity on it; keep the incumbent there
            dead = np.linalg.norm(stepped, axis=(1, 2)) <= 1e-12
            if np.any(dead):
                stepped[dead] = x[dead]
            x = retract(stepped)
            new_vals = _witness_values(op, x)
            if np.all(np.abs(new_vals - vals) <= cfg.rel_tol * np.maximum(vals, 1e-300)):
                vals = new_vals
                break
            vals = new_vals
    else:
        vals = np.zeros(starts)
    per_start = [float(v) for v in vals]
    witnesses = list(x)
    best = int(np.argmin(vals)) if direction == "min" else int(np.argmax(vals))
    witness = witnesses[best]
    value = float(np.linalg.norm(apply_op(op, witness)))
    return CmsvEstimate(
        tau=float(tau),
        direction=direction,
        value=value,
        witness=witness,
        starts=starts,
        per_start_values=tuple(per_start),
    )


def _sample_feasible_batch(rng, count, shape, tau):
    raw = rng.standard_normal((count,) + shape)
    u, s, vt = np.linalg.svd(raw, full_matrices=False)
    s = _project_sigma_batch(s, tau)
    return np.einsum("bij,bj,bjk->bik", u, s, vt)


def brute_force_cmsv(op, tau, direction, samples=100_000, seed=0, refine=True):
    """Sampling oracle for tiny instances (n1*n2 <= 9 enforced).

    Evaluates the measurement norm over quasi-uniform feasible points and,
    when ``refine`` is set, over shrinking neighborhoods of the incumbent.
    Same one-sided evidence semantics as :func:`estimate_cmsv`.  With
    ``refine=False`` and a shared seed, two operators are evaluated on the
    identical sample set.
    """
    _check_tau(op, tau)
    if direction not in ("min", "max"):
        raise ValueError("direction must be 'min' or 'max'")
    n1, n2 = op.shape
    if n1 * n2 > 9:
        raise ValueError("brute force limited to n1*n2 <= 9")
    if samples < 10_000:
        raise ValueError("samples must be >= 10000")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(derive_seed(seed, 0))))
    pick = np.argmin if direction == "min" else np.argmax

    best_x = None
    best_val = None
    chunk = 20_000
    remaining = samples
    while remaining > 0:
        count = min(chunk, remaining)
        remaining -= count
        batch = _sample_feasible_batch(rng, count, (n1, n2), tau)
        vals = _witness_values(op, batch)
        i = int(pick(vals))
        cand = float(vals[i])
        better = best_val is None or (cand < best_val if direction == "min" else cand > best_val)
        if better:
            best_val = cand
            best_x = batch[i]

    if refine:
        radius = 0.3
        for round_idx in range(1, 11):
            rng_r = np.random.Generator(
                np.random.Philox(np.random.SeedSequence(derive_seed(seed, round_idx)))
            )
            noise = rng_r.standard_normal((2000, n1, n2))
            cand = best_x[None, :, :] + radius * noise
            u, s, vt = np.linalg.svd(cand, full_matrices=False)
            s = _project_sigma_batch(s, tau)
            cand = np.einsum("bij,bj,bjk->bik", u, s, vt)
            vals = _witness_values(op, cand)
            i = int(pick(vals))
            better = vals[i] < best_val if direction == "min" else vals[i] > best_val
            if better:
                best_val = float(vals[i])
                best_x = cand[i]
            radius *= 0.5

    # exact feasibility of the reported witness
    witness = project_htau(best_x, tau)
    value = float(np.linalg.norm(apply_op(op, witness)))
    return CmsvEstimate(
        tau=float(tau),
        direction=direction,
        value=value,
        witness=witness,
        starts=samples,
        per_start_values=(),
    )


def _rayleigh_factor_step(phi, gram_factor, direction):
    """Extremal generalized eigenvector of (phi^T phi, gram_factor)."""
    m_mat = phi.T @ phi
    # symmetrize against roundoff; regularize the metric for stability
    b = 0.5 * (gram_factor + gram_factor.T)
    b = b + 1e-12 * np.trace(b) / b.shape[0] * np.eye(b.shape[0])
    vals, vecs = scipy.linalg.eigh(0.5 * (m_mat + m_mat.T), b)
    idx = 0 if direction == "min" else -1
    return vecs[:, idx]


def estimate_rcsv(op, r, direction, starts=8, seed=0, cfg=None, sweeps=40):
    """Alternating Rayleigh-quotient optimization over the factorization
    X = L R^T with rank(X) <= r and unit Frobenius norm.

    Each half-step solves a generalized eigenvalue problem exactly, so the
    quotient is monotone along sweeps.  One-sided evidence semantics.
    """
    n1, n2 = op.shape
    if not 1 <= r <= min(n1, n2):
        raise ValueError(f"r={r} out of range [1, {min(n1, n2)}]")
    if direction not in ("min", "max"):
        raise ValueError("direction must be 'min' or 'max'")
    cfg = cfg or SolverConfig()
    mats = op.matrices

    per_start = []
    witnesses = []
    for k in range(starts):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(derive_seed(seed, k))))
        left = rng.standard_normal((n1, r))
        right = rng.standard_normal((n2, r))
        prev = None
        for _ in range(sweeps):
            # left update: rows of phi are (A_k @ right).flatten()
            phi = (mats @ right).reshape(op.m, -1)
            gf = np.kron(np.eye(n1), right.T @ right)
            left = _rayleigh_factor_step(phi, gf, direction).reshape(n1, r)
            # right update: rows of phi are (A_k^T @ left).flatten()
            phi = (np.transpose(mats, (0, 2, 1)) @ left).reshape(op.m, -1)
            gf = np.kron(np.eye(n2), left.T @ left)
            right = _rayleigh_factor_step(phi, gf, direction).reshape(n2, r)
            x = left @ right.T
            nrm = np.linalg.norm(x)
            if nrm == 0.0:
                break
            val = float(np.linalg.norm(apply_op(op, x / nrm)))
            if prev is not None and abs(val - prev) <= cfg.rel_tol * 1e-3 * max(val, 1e-300):
                prev = val
                break
            prev = val
        x = left @ right.T
        nrm = np.linalg.norm(x)
        if nrm == 0.0:
            x = np.zeros((n1, n2))
            x[0, 0] = 1.0
            nrm = 1.0
        x = x / nrm
        per_start.append(float(np.linalg.norm(apply_op(op, x))))
        witnesses.append(x)

    vals = np.asarray(per_start)
    best = int(np.argmin(vals)) if direction == "min" else int(np.argmax(vals))
    witness = witnesses[best]
    # exact renormalization for the feasibility invariant
    witness = witness / np.linalg.norm(witness)
    value = float(np.linalg.norm(apply_op(op, witness)))
    return RcsvEstimate(
        r=int(r),
        direction=direction,
        value=value,
        witness=witness,
        starts=starts,
        per_start_values=tuple(per_start),
    )


def mric_upper_bound(rho_min, rho_max):
    """max(|1 - rho_min^2|, |rho_max^2 - 1|).

    With rank-constrained extremal values this is the restricted isometry
    constant exactly; with the nuclear-norm-constrained values it is an
    upper bound.
    """
    if not 0 <= rho_min <= rho_max:
        raise ValueError("need 0 <= rho_min <= rho_max")
    return max(abs(1.0 - rho_min**2), abs(rho_max**2 - 1.0))
