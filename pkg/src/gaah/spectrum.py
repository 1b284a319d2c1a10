"""Resonance poles of the collectively coupled lattice.

The Laplace transform of the evolution closes on the characteristic matrix

    M(E) = H_S + Sigma(E) * U - E * I,

where U is the all-ones matrix (every pair of sites talks through the same
bath) and Sigma is the bath self-energy.  Decaying eigenmodes show up as
zeros of det M(E) in the lower half plane.

Sigma at complex E is evaluated under a SigmaMode: pinned to the real axis
(any s; exact for narrow resonances) or analytically continued through the
s = 1 closed form (faithful for broad resonances too).  The real-axis
variant makes det M smooth but *not* holomorphic in E, so root finding
treats (Re E, Im E) as two real unknowns with a full 2x2 Jacobian from
central differences; that iteration handles the continued variant as well.

Two independent evaluation routes are kept side by side on purpose:

* ``char_determinant_scaled``       -- LU factorization of the full matrix;
* ``char_determinant_lemma_scaled`` -- rank-one update formula
  det M = det(H_S - E) * (1 + Sigma(E) * g(E)) with
  g(E) = sum_m w_m / (lambda_m - E) and w_m the squared collective weight
  of eigenvector m.

They agree to roundoff and cross-validate each other in the tests, as do
``refine_pole`` (Newton on the determinant) and ``self_consistent_pole``
(fixed-point iteration on the dressed eigenproblem).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .bath import BathParams, ResiduePrescription, SigmaMode, self_energy_eval
from .errors import NumericsError, ParameterError, PrescriptionViolationError
from .model import (
    EigenDecomposition,
    ModelParams,
    build_hamiltonian,
    diagonalize,
    highest_excited_state,
)

#: A refined pole with Im E above this is a genuine prescription violation,
#: below it is clamped to the real axis.
IM_CLAMP = 1e-12


def characteristic_matrix(model: ModelParams, bath: BathParams, energy: complex,
                          prescription: ResiduePrescription = ResiduePrescription.HALF,
                          sigma_mode: SigmaMode = SigmaMode.AUTO) -> np.ndarray:
    sigma = self_energy_eval(bath, energy, prescription, sigma_mode)
    H = build_hamiltonian(model).matrix.astype(complex)
    M = H + sigma * np.ones((model.N, model.N), dtype=complex)
    M[np.diag_indices(model.N)] -= energy
    return M


def _scaled_det_from_lu(lu: np.ndarray, piv: np.ndarray) -> tuple[float, complex]:
    diag = np.diag(lu)
    mags = np.abs(diag)
    if np.any(mags == 0.0):
        return -math.inf, 1.0 + 0.0j
    log_abs = float(np.sum(np.log(mags)))
    phase = complex(np.prod(diag / mags))
    # each row interchange flips the determinant sign
    swaps = int(np.sum(piv != np.arange(len(piv))))
    if swaps % 2:
        phase = -phase
    return log_abs, phase


def char_determinant_scaled(model: ModelParams, bath: BathParams, energy: complex,
                            prescription: ResiduePrescription = ResiduePrescription.HALF,
                            sigma_mode: SigmaMode = SigmaMode.AUTO,
                            ) -> tuple[float, complex]:
    """det M(E) in scaled form (log_abs, phase) with det = exp(log_abs) * phase
    and |phase| = 1, so grid scans over 21 sites never overflow."""
    M = characteristic_matrix(model, bath, energy, prescription, sigma_mode)
    try:
        lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NumericsError(f"LU factorization failed at E = {energy}: {exc}") from exc
    return _scaled_det_from_lu(lu, piv)


def char_determinant(model: ModelParams, bath: BathParams, energy: complex,
                     prescription: ResiduePrescription = ResiduePrescription.HALF,
                     sigma_mode: SigmaMode = SigmaMode.AUTO) -> complex:
    log_abs, phase = char_determinant_scaled(model, bath, energy, prescription,
                                             sigma_mode)
    return cmath.exp(log_abs) * phase


def collective_weights(dec: EigenDecomposition) -> np.ndarray:
    """w_m = (sum_n v_mn)^2: how strongly eigenstate m couples to the
    collective (uniform) bath channel."""
    return np.asarray(dec.states.sum(axis=0)) ** 2


def collective_resolvent(dec: EigenDecomposition, energy: complex) -> complex:
    """g(E) = <1| (H_S - E)^{-1} |1> = sum_m w_m / (lambda_m - E)."""
    w = collective_weights(dec)
    return complex(np.sum(w / (dec.energies - energy)))


def char_determinant_lemma_scaled(model: ModelParams, bath: BathParams, energy: complex,
                                  prescription: ResiduePrescription = ResiduePrescription.HALF,
                                  sigma_mode: SigmaMode = SigmaMode.AUTO,
                                  dec: EigenDecomposition | None = None,
                                  ) -> tuple[float, complex]:
    """Independent determinant route via the rank-one update of det(H_S - E)."""
    if dec is None:
        dec = diagonalize(build_hamiltonian(model))
    sigma = self_energy_eval(bath, energy, prescription, sigma_mode)
    factor = 1.0 + sigma * collective_resolvent(dec, energy)
    log_abs = 0.0
    phase = 1.0 + 0.0j
    for lam in dec.energies:
        z = lam - energy
        r = abs(z)
        if r == 0.0:
            return -math.inf, 1.0 + 0.0j
        log_abs += math.log(r)
        phase *= z / r
    r = abs(factor)
    if r == 0.0:
        return -math.inf, 1.0 + 0.0j
    return log_abs + math.log(r), phase * factor / r


@dataclass(frozen=True)
class PoleSearchRegion:
    """Rectangle in the complex energy plane (im_max <= 0 scans the decaying
    half plane up to the real axis)."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ParameterError("pole search region must have positive extent")


def default_search_region(model: ModelParams, margin: float = 3.0,
                          im_depth: float = 0.2) -> PoleSearchRegion:
    """Window around the top of the closed-system spectrum: the long-lived
    collective modes live within a few hopping amplitudes of the highest
    eigenvalue, and their widths stay well inside im_depth.  The window is
    clipped to Re E > 0 where the continued self-energy is single valued;
    widen it explicitly (with the real-axis mode) to chase anything below."""
    top = float(diagonalize(build_hamiltonian(model)).energies[-1])
    return PoleSearchRegion(re_min=max(top - margin, 1e-6),
                            re_max=top + margin,
                            im_min=-abs(im_depth), im_max=0.0)


@dataclass
class DeterminantGrid:
    """Scaled determinant sampled on a rectangular grid.

    ``log_abs`` holds ln|det M| and ``phase`` the unit-modulus factor
    det / |det|; both have shape (len(im), len(re)).  The phase carries the
    signs of Re(det) and Im(det), which is what the contour-crossing view
    of the root search needs.
    """

    re: np.ndarray
    im: np.ndarray
    log_abs: np.ndarray
    phase: np.ndarray

    def sign_re(self) -> np.ndarray:
        """Sign of Re det on the grid (+1, 0, -1)."""
        return np.sign(self.phase.real).astype(int)

    def sign_im(self) -> np.ndarray:
        """Sign of Im det on the grid (+1, 0, -1)."""
        return np.sign(self.phase.imag).astype(int)

    def crossing_cells(self) -> list[tuple[int, int]]:
        """Cells whose four corners straddle zero in both Re det and Im det.

        A cell is indexed by its lower-left corner (i, j) with i along im
        and j along re.  "Straddle" counts touching zero, so a root sitting
        exactly on a grid line is still caught; cells where the determinant
        vanishes identically on all corners are skipped as degenerate.
        """
        rs = self.phase.real
        ims = self.phase.imag
        cells = []
        for i in range(len(self.im) - 1):
            for j in range(len(self.re) - 1):
                r = rs[i:i + 2, j:j + 2]
                m = ims[i:i + 2, j:j + 2]
                if np.all(r == 0.0) and np.all(m == 0.0):
                    continue
                if r.min() <= 0.0 <= r.max() and m.min() <= 0.0 <= m.max():
                    cells.append((i, j))
        return cells

    def crossing_points(self) -> list[complex]:
        """Centers of the crossing cells as complex energies."""
        return [complex(0.5 * (self.re[j] + self.re[j + 1]),
                        0.5 * (self.im[i] + self.im[i + 1]))
                for i, j in self.crossing_cells()]


def scan_grid(model: ModelParams, bath: BathParams, region: PoleSearchRegion,
              n_re: int = 200, n_im: int = 80,
              prescription: ResiduePrescription = ResiduePrescription.HALF,
              sigma_mode: SigmaMode = SigmaMode.AUTO) -> DeterminantGrid:
    """Sample ln|det M(E)| over the region.  Under the real-axis mode the
    self-energy depends only on Re(E), so each of the n_re columns costs one
    dispersive integral; the continued mode is cheap enough per point."""
    if n_re < 2 or n_im < 2:
        raise ParameterError("grid needs at least 2 points per axis")
    mode = sigma_mode.resolve(bath)
    re = np.linspace(region.re_min, region.re_max, n_re)
    im = np.linspace(region.im_min, region.im_max, n_im)
    H = build_hamiltonian(model).matrix.astype(complex)
    U = np.ones((model.N, model.N), dtype=complex)
    out = np.empty((n_im, n_re))
    ph = np.empty((n_im, n_re), dtype=complex)
    for j, x in enumerate(re):
        if mode is SigmaMode.REAL_AXIS:
            base = H + self_energy_eval(bath, x, prescription, mode) * U
        for i, y in enumerate(im):
            E = complex(x, y)
            if mode is SigmaMode.REAL_AXIS:
                M = base.copy()
            else:
                M = H + self_energy_eval(bath, E, prescription, mode) * U
            M[np.diag_indices(model.N)] -= E
            lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
            out[i, j], ph[i, j] = _scaled_det_from_lu(lu, piv)
    return DeterminantGrid(re=re, im=im, log_abs=out, phase=ph)


def grid_minima(grid: DeterminantGrid) -> list[complex]:
    """Interior strict local minima of ln|det|, sorted from deepest up; these
    seed the Newton refinement."""
    A = grid.log_abs
    seeds = []
    for i in range(1, A.shape[0] - 1):
        for j in range(1, A.shape[1] - 1):
            c = A[i, j]
            neigh = np.concatenate([
                A[i - 1, j - 1:j + 2], A[i + 1, j - 1:j + 2],
                A[i, j - 1:j], A[i, j + 1:j + 2],
            ])
            if np.all(c < neigh):
                seeds.append((c, complex(grid.re[j], grid.im[i])))
    seeds.sort(key=lambda t: t[0])
    return [e for _, e in seeds]


def perturbative_pole_seeds(model: ModelParams, bath: BathParams,
                            region: PoleSearchRegion | None = None,
                            prescription: ResiduePrescription = ResiduePrescription.HALF,
                            sigma_mode: SigmaMode = SigmaMode.AUTO) -> list[complex]:
    """Pole estimates from the rank-one structure, one per eigenstate.

    Near lambda_m the zero condition 1 + Sigma * g(E) = 0 gives

        E = lambda_m + w_m Sigma(lambda_m) / (1 + Sigma(lambda_m) g_reg),

    with g_reg the resolvent minus its singular term.  Resumming g_reg
    matters: collective weights reach w ~ 20, so the bare first-order shift
    w_m * Sigma can be wildly wrong.  Grid minima merge when two poles sit
    closer than a cell, which happens for near-degenerate doublets; one seed
    per eigenstate cannot miss them.

    On top of the per-eigenstate estimates the midpoints of consecutive
    eigenvalues are seeded as well: the zeros of 1 + Sigma * g interlace the
    lambda_m, so each gap holds at most one pole and the midpoint is a safe
    basin for the Newton polish even where the per-state estimate drifts to
    a neighbouring gap.
    """
    dec = diagonalize(build_hamiltonian(model))
    w = collective_weights(dec)
    lam = dec.energies
    seeds = []
    for k in range(model.N):
        if region is not None and not (region.re_min <= lam[k] <= region.re_max):
            continue
        try:
            sig = self_energy_eval(bath, complex(lam[k]), prescription, sigma_mode)
        except ParameterError:
            continue
        g_reg = complex(np.sum(np.delete(w, k) / (np.delete(lam, k) - lam[k])))
        seeds.append(complex(lam[k]) + w[k] * sig / (1.0 + sig * g_reg))
    for k in range(model.N - 1):
        mid = 0.5 * (lam[k] + lam[k + 1])
        if region is not None and not (region.re_min <= mid <= region.re_max):
            continue
        seeds.append(complex(mid))
    return seeds


@dataclass(frozen=True)
class ResonancePole:
    """A refined zero of det M(E) with its mode vector."""

    energy: complex
    vector: np.ndarray
    overlap: float
    iterations: int
    converged: bool
    residual: float        # |det| / exp(common scale) at the solution


def _det_value(model, bath, E, prescription, sigma_mode, scale):
    log_abs, phase = char_determinant_scaled(model, bath, E, prescription, sigma_mode)
    return cmath.exp(log_abs - scale) * phase


def null_vector(model: ModelParams, bath: BathParams, energy: complex,
                prescription: ResiduePrescription = ResiduePrescription.HALF,
                sigma_mode: SigmaMode = SigmaMode.AUTO,
                sweeps: int = 3) -> np.ndarray:
    """Null direction of M(E) by inverse iteration, started from the H_S
    eigenvector nearest Re(E)."""
    dec = diagonalize(build_hamiltonian(model))
    k = int(np.argmin(np.abs(dec.energies - energy.real)))
    v = dec.states[:, k].astype(complex)
    M = characteristic_matrix(model, bath, energy, prescription, sigma_mode)
    try:
        lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
        for _ in range(sweeps):
            v = scipy.linalg.lu_solve((lu, piv), v, check_finite=False)
            v /= np.linalg.norm(v)
    except scipy.linalg.LinAlgError:
        # exactly singular: fall back to the smallest singular direction
        _, _, vh = np.linalg.svd(M)
        v = vh[-1].conj()
    # fix the overall phase: largest component real positive
    k = int(np.argmax(np.abs(v)))
    v *= np.exp(-1j * np.angle(v[k]))
    return v


def state_overlap(vector: np.ndarray, state: np.ndarray) -> float:
    """|<state|vector>|^2 with both sides normalized."""
    v = np.asarray(vector) / np.linalg.norm(vector)
    s = np.asarray(state) / np.linalg.norm(state)
    return float(np.abs(np.vdot(s, v)) ** 2)


def refine_pole(model: ModelParams, bath: BathParams, seed: complex,
                prescription: ResiduePrescription = ResiduePrescription.HALF,
                sigma_mode: SigmaMode = SigmaMode.AUTO,
                reference: np.ndarray | None = None,
                tol: float = 1e-12, max_iter: int = 100) -> ResonancePole:
    """Drive det M(E) to zero by a damped 2D Newton iteration in
    (Re E, Im E).

    The determinant is evaluated in scaled form and the five-point stencil of
    each iteration shares a common scale, so the Jacobian stays well
    conditioned even when |det| traverses many orders of magnitude.  Treating
    the two real coordinates separately costs nothing when Sigma is
    holomorphic and is required when it is pinned to the real axis.

    Raises PrescriptionViolationError if the converged pole sits above the
    real axis by more than the clamping threshold.
    """
    x, y = float(seed.real), float(seed.imag)
    it = 0
    converged = False
    resid = math.inf
    for it in range(1, max_iter + 1):
        h = 1e-7 * (1.0 + math.hypot(x, y))
        pts = [complex(x, y), complex(x + h, y), complex(x - h, y),
               complex(x, y + h), complex(x, y - h)]
        scaled = [char_determinant_scaled(model, bath, E, prescription, sigma_mode)
                  for E in pts]
        scale = max(la for la, _ in scaled)
        if scale == -math.inf:
            converged = True
            resid = 0.0
            break
        D = [cmath.exp(la - scale) * ph for la, ph in scaled]
        F = np.array([D[0].real, D[0].imag])
        resid = float(np.hypot(*F))
        J = np.array([
            [(D[1].real - D[2].real) / (2 * h), (D[3].real - D[4].real) / (2 * h)],
            [(D[1].imag - D[2].imag) / (2 * h), (D[3].imag - D[4].imag) / (2 * h)],
        ])
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError as exc:
            raise NumericsError(
                f"singular Newton Jacobian near E = {complex(x, y)}") from exc
        # backtrack if the full step overshoots
        lam_bt = 1.0
        for _ in range(6):
            xn, yn = x + lam_bt * step[0], y + lam_bt * step[1]
            Dn = _det_value(model, bath, complex(xn, yn), prescription, sigma_mode,
                            scale)
            if abs(Dn) <= resid or lam_bt < 0.05:
                break
            lam_bt *= 0.5
        x, y = x + lam_bt * step[0], y + lam_bt * step[1]
        if lam_bt * math.hypot(*step) < tol * (1.0 + math.hypot(x, y)):
            converged = True
            break
    if y > IM_CLAMP:
        raise PrescriptionViolationError(complex(x, y))
    if 0.0 < y <= IM_CLAMP:
        y = 0.0
    energy = complex(x, y)
    vec = null_vector(model, bath, energy, prescription, sigma_mode)
    if reference is None:
        reference = highest_excited_state(diagonalize(build_hamiltonian(model)))
    return ResonancePole(
        energy=energy,
        vector=vec,
        overlap=state_overlap(vec, reference),
        iterations=it,
        converged=converged,
        residual=resid,
    )


def self_consistent_pole(model: ModelParams, bath: BathParams, seed: complex,
                         prescription: ResiduePrescription = ResiduePrescription.HALF,
                         sigma_mode: SigmaMode = SigmaMode.AUTO,
                         tol: float = 1e-12, max_iter: int = 200) -> complex:
    """Independent pole route: iterate E <- eig(H_S + Sigma(E) U) picking the
    eigenvalue nearest the current E.  Converges linearly; used to
    cross-check the Newton refinement, not to replace it."""
    H = build_hamiltonian(model).matrix.astype(complex)
    U = np.ones((model.N, model.N), dtype=complex)
    E = complex(seed)
    for _ in range(max_iter):
        sigma = self_energy_eval(bath, E, prescription, sigma_mode)
        evals = np.linalg.eigvals(H + sigma * U)
        E_next = complex(evals[np.argmin(np.abs(evals - E))])
        if abs(E_next - E) < tol * (1.0 + abs(E_next)):
            return E_next
        E = E_next
    raise NumericsError(f"self-consistent pole iteration stalled near E = {E}")


def transition_frequency(pole_a: complex | ResonancePole,
                         pole_b: complex | ResonancePole) -> float:
    """Beat (angular) frequency |Re E_a - Re E_b| between two resonances; the
    survival-probability oscillation period is 2*pi over this."""
    ea = pole_a.energy if isinstance(pole_a, ResonancePole) else pole_a
    eb = pole_b.energy if isinstance(pole_b, ResonancePole) else pole_b
    return abs(ea.real - eb.real)


def find_poles(model: ModelParams, bath: BathParams, region: PoleSearchRegion,
               n_re: int = 200, n_im: int = 80,
               prescription: ResiduePrescription = ResiduePrescription.HALF,
               sigma_mode: SigmaMode = SigmaMode.AUTO,
               extra_seeds: list[complex] | None = None,
               cluster_tol: float = 1e-6) -> list[ResonancePole]:
    """Locate all poles in a region: grid scan for minima, resummed
    eigenstate seeds for doublets a coarse grid would merge, Newton polish,
    then cluster duplicates.  Sorted by descending Re(E)."""
    grid = scan_grid(model, bath, region, n_re, n_im, prescription, sigma_mode)
    seeds = grid_minima(grid)
    seeds += perturbative_pole_seeds(model, bath, region, prescription, sigma_mode)
    if extra_seeds:
        seeds += list(extra_seeds)
    reference = highest_excited_state(diagonalize(build_hamiltonian(model)))
    poles: list[ResonancePole] = []
    for seed in seeds:
        try:
            pole = refine_pole(model, bath, seed, prescription, sigma_mode,
                               reference=reference)
        except (ParameterError, NumericsError, PrescriptionViolationError):
            continue
        if not pole.converged:
            continue
        E = pole.energy
        if not (region.re_min - cluster_tol <= E.real <= region.re_max + cluster_tol):
            continue
        if not (region.im_min - cluster_tol <= E.imag <= region.im_max + cluster_tol):
            continue
        if any(abs(E - p.energy) < cluster_tol * (1.0 + abs(E)) for p in poles):
            continue
        poles.append(pole)
    poles.sort(key=lambda p: -p.energy.real)
    return poles
