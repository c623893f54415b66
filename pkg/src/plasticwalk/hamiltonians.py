"""Continuous-time reference evolutions for the walk's two limits.

The discrete-space references are nearest-neighbour lattice Hamiltonians

    (H psi)_l = (i / (2 dx)) * sigma_x * (c_{l-1/2} psi_{l-1} - c_{l+1/2} psi_{l+1})
                - m * sigma_z * psi_l

with the speed sampled at half-sites (bond midpoints), which makes H
Hermitian term by term. The continuous-space reference propagates each
ring momentum with the 2x2 block exp(-i (c k sigma_x - m sigma_z) T).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DomainError, SizeError, SolverError
from .fields import CProfile, SpinorField
from .walk import ring_momenta

DENSE_DIM_BUDGET = 4096  # largest 2N handled by dense diagonalization


@dataclass
class LatticeHamiltonian:
    """Banded Hermitian operator on spinor fields over a periodic ring.

    ``c_minus[l]`` and ``c_plus[l]`` are the hopping speeds on the bonds to
    the left and right of site l; Hermiticity holds because neighbouring
    sites quote the same speed for their shared bond.
    """

    c_minus: np.ndarray
    c_plus: np.ndarray
    dx: float
    m: float

    @property
    def n_sites(self) -> int:
        return len(self.c_minus)

    @property
    def dim(self) -> int:
        return 2 * self.n_sites

    def apply(self, data: np.ndarray) -> np.ndarray:
        """Matrix-vector product on an (N, 2) component array."""
        left = np.roll(data, +1, axis=0)   # psi_{l-1}
        right = np.roll(data, -1, axis=0)  # psi_{l+1}
        hop = (0.5j / self.dx) * (
            self.c_minus[:, None] * left[:, ::-1] - self.c_plus[:, None] * right[:, ::-1]
        )
        mass = np.empty_like(data)
        mass[:, 0] = -self.m * data[:, 0]
        mass[:, 1] = +self.m * data[:, 1]
        return hop + mass

    def apply_field(self, field: SpinorField) -> SpinorField:
        return field.with_data(self.apply(field.data))

    def dense(self) -> np.ndarray:
        n = self.n_sites
        h = np.zeros((2 * n, 2 * n), dtype=np.complex128)
        sx = np.array([[0.0, 1.0], [1.0, 0.0]])
        for l in range(n):
            lm, lp = (l - 1) % n, (l + 1) % n
            h[2 * l : 2 * l + 2, 2 * lm : 2 * lm + 2] += (0.5j / self.dx) * self.c_minus[l] * sx
            h[2 * l : 2 * l + 2, 2 * lp : 2 * lp + 2] += (-0.5j / self.dx) * self.c_plus[l] * sx
            h[2 * l, 2 * l] += -self.m
            h[2 * l + 1, 2 * l + 1] += +self.m
        return h

    def sparse(self) -> sp.csc_matrix:
        n = self.n_sites
        rows, cols, vals = [], [], []
        for l in range(n):
            lm, lp = (l - 1) % n, (l + 1) % n
            for a in (0, 1):
                b = 1 - a
                rows.append(2 * l + a)
                cols.append(2 * lm + b)
                vals.append(0.5j / self.dx * self.c_minus[l])
                rows.append(2 * l + a)
                cols.append(2 * lp + b)
                vals.append(-0.5j / self.dx * self.c_plus[l])
            rows += [2 * l, 2 * l + 1]
            cols += [2 * l, 2 * l + 1]
            vals += [-self.m, +self.m]
        return sp.csc_matrix((vals, (rows, cols)), shape=(2 * n, 2 * n))


def lattice_hamiltonian_flat(N: int, dx: float, m: float, c: float) -> LatticeHamiltonian:
    """Homogeneous lattice Hamiltonian; momentum blocks have eigenvalues
    +- sqrt(c^2 sin^2(k dx)/dx^2 + m^2)."""
    if N < 2:
        raise DomainError(f"need N >= 2 sites, got {N}")
    if dx <= 0:
        raise DomainError(f"dx must be positive, got {dx}")
    if not 0.0 <= c <= 1.0:
        raise DomainError(f"c must lie in [0, 1], got {c}")
    if m < 0:
        raise DomainError(f"mass must be nonnegative, got {m}")
    cs = np.full(N, float(c))
    return LatticeHamiltonian(c_minus=cs, c_plus=cs.copy(), dx=dx, m=m)


def lattice_hamiltonian_curved(
    N: int, dx: float, m: float, cprofile: CProfile, t0: float = 0.0
) -> LatticeHamiltonian:
    """Inhomogeneous lattice Hamiltonian with bond speeds c(t0, x_l +- dx/2)."""
    if N < 2:
        raise DomainError(f"need N >= 2 sites, got {N}")
    if dx <= 0:
        raise DomainError(f"dx must be positive, got {dx}")
    if m < 0:
        raise DomainError(f"mass must be nonnegative, got {m}")
    xs = np.arange(N) * dx
    c_minus = cprofile.sample(t0, xs - 0.5 * dx)
    c_plus = cprofile.sample(t0, xs + 0.5 * dx)
    return LatticeHamiltonian(c_minus=c_minus, c_plus=c_plus, dx=dx, m=m)


def evolve_exact(H: LatticeHamiltonian, psi0: SpinorField, T: float) -> SpinorField:
    """exp(-i H T) psi0 by dense diagonalization. Budget: 2N <= 4096."""
    if H.dim > DENSE_DIM_BUDGET:
        raise SizeError(f"dense evolution limited to dim {DENSE_DIM_BUDGET}, got {H.dim}")
    if H.n_sites != psi0.n_sites:
        raise DomainError("operator and field live on different grids")
    w, v = scipy.linalg.eigh(H.dense())
    out = (v * np.exp(-1j * w * T)) @ (v.conj().T @ psi0.data.reshape(-1))
    return psi0.with_data(out.reshape(-1, 2))


def evolve_crank_nicolson(
    H: LatticeHamiltonian, psi0: SpinorField, T: float, steps: int
) -> SpinorField:
    """Repeated Cayley steps (I + i H tau/2)^{-1} (I - i H tau/2), tau = T/steps.

    The rational factor is exactly unitary for Hermitian H, so the norm is
    conserved up to solver roundoff; the global error is O(tau^2). The
    periodic band matrix is LU-factorized once and reused for every step.
    """
    if steps < 1:
        raise DomainError(f"steps must be >= 1, got {steps}")
    if H.n_sites != psi0.n_sites:
        raise DomainError("operator and field live on different grids")
    tau = T / steps
    hs = H.sparse()
    eye = sp.identity(H.dim, format="csc", dtype=np.complex128)
    a = (eye + 0.5j * tau * hs).tocsc()
    b = (eye - 0.5j * tau * hs).tocsc()
    try:
        lu = spla.splu(a)
    except RuntimeError as exc:
        raise SolverError(f"factorization of the stepping matrix failed: {exc}") from exc
    v = psi0.data.reshape(-1)
    norm0 = np.linalg.norm(v)
    for _ in range(steps):
        v = lu.solve(b @ v)
    if not np.all(np.isfinite(v)):
        raise SolverError("Cayley stepping produced non-finite amplitudes")
    drift = abs(np.linalg.norm(v) - norm0) / max(norm0, 1e-300)
    if drift > 1e-8:
        raise SolverError(f"norm drift {drift:.3e} after {steps} Cayley steps")
    return psi0.with_data(v.reshape(-1, 2))


def default_cn_steps(dx: float, T: float) -> int:
    """Step count from the default spacing rule tau = min(dx/4, T/256)."""
    tau = min(dx / 4.0, T / 256.0)
    return max(1, int(np.ceil(T / tau)))


@dataclass
class DiracPropagator:
    """Momentum-resolved continuum propagator over the ring modes.

    ``blocks[i]`` is exp(-i (c k_i sigma_x - m sigma_z) T) for the FFT-ordered
    momentum k_i; fields are propagated by transforming each component,
    applying the block, and transforming back.
    """

    ks: np.ndarray
    blocks: np.ndarray  # (N, 2, 2)
    m: float
    c: float
    T: float

    def apply(self, field: SpinorField) -> SpinorField:
        if len(self.ks) != field.n_sites:
            raise DomainError("propagator and field live on different grids")
        ph = np.fft.fft(field.data, axis=0)
        ph = np.einsum("kij,kj->ki", self.blocks, ph)
        return field.with_data(np.fft.ifft(ph, axis=0))


def dirac_block(k: float, c: float, m: float, T: float) -> np.ndarray:
    """Closed-form exp(-i (c k sigma_x - m sigma_z) T)."""
    e = np.hypot(c * k, m)
    if e == 0.0:
        return np.eye(2, dtype=np.complex128)
    h = np.array([[-m, c * k], [c * k, m]], dtype=np.complex128)
    return np.cos(e * T) * np.eye(2) - 1j * np.sin(e * T) / e * h


def dirac_propagator(N: int, dx: float, m: float, c: float, T: float) -> DiracPropagator:
    """Continuum propagator table over the N ring momenta."""
    if not 0.0 <= c <= 1.0:
        raise DomainError(f"c must lie in [0, 1], got {c}")
    if m < 0:
        raise DomainError(f"mass must be nonnegative, got {m}")
    ks = ring_momenta(N, dx)
    blocks = np.empty((N, 2, 2), dtype=np.complex128)
    for i, k in enumerate(ks):
        blocks[i] = dirac_block(float(k), c, m, T)
    return DiracPropagator(ks=ks, blocks=blocks, m=m, c=c, T=T)


def trig_interpolate(field: SpinorField, refinement: int) -> SpinorField:
    """Spectral interpolation onto a grid refined by an integer factor.

    Exact for band-limited fields; the Nyquist mode of an even-length grid
    is split symmetrically to keep real data real.
    """
    if refinement < 1:
        raise DomainError(f"refinement must be >= 1, got {refinement}")
    if refinement == 1:
        return field.copy()
    n = field.n_sites
    nf = n * refinement
    spec = np.fft.fft(field.data, axis=0)
    out = np.zeros((nf, 2), dtype=np.complex128)
    h = n // 2
    if n % 2 == 0:
        out[:h] = spec[:h]
        out[nf - h + 1 :] = spec[h + 1 :]
        out[h] = 0.5 * spec[h]
        out[nf - h] = 0.5 * spec[h]
    else:
        out[: h + 1] = spec[: h + 1]
        out[nf - h :] = spec[h + 1 :]
    return SpinorField(np.fft.ifft(out, axis=0) * refinement, field.dx / refinement)


def restrict(field: SpinorField, refinement: int) -> SpinorField:
    """Pointwise restriction back to the coarse grid."""
    return SpinorField(field.data[::refinement].copy(), field.dx * refinement)


def curved_dirac_reference(
    psi0: SpinorField, cprofile: CProfile, m: float, T: float, refinement: int
) -> SpinorField:
    """Method-of-lines continuum reference for inhomogeneous speeds.

    The field is spectrally interpolated to a grid refined by the given
    factor, evolved under the curved lattice Hamiltonian there with Cayley
    steps of size tau <= dx_fine/4, and restricted back. On the fine grid
    the O(dx_fine^2) discretization error dominates the O(tau^2) stepping
    error, so the result converges to the curved continuum evolution.
    """
    fine = trig_interpolate(psi0, refinement)
    h = lattice_hamiltonian_curved(fine.n_sites, fine.dx, m, cprofile, t0=0.0)
    tau = fine.dx / 4.0
    steps = max(1, int(np.ceil(T / tau)))
    if T > 0:
        evolved = evolve_crank_nicolson(h, fine, T, steps)
    else:
        evolved = fine
    return restrict(evolved, refinement)
