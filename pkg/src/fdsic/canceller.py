"""Parallel-Hammerstein digital SI canceller.

The effective SI channel (the PA cascaded with the RF-cancelled coupling path) is
modelled as

    x_si[n] = sum_{p odd} sum_{k=-pre}^{post} f[p, k] * psi_p(x[n - k]),
    psi_p(x) = |x|^(p-1) * x,

which is linear in ``f``. Coefficients are fitted by block least squares on a
training window, then used to regenerate and subtract the SI.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from fdsic.dsp import ComplexSignal
from fdsic.errors import EstimationError, InvalidInputError

#: Largest tolerated condition number of the column-scaled basis matrix.
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class PHConfig:
    """Canceller structure: odd nonlinearity ``order`` and ``pre``/``post`` memory taps."""

    order: int = 5
    pre_taps: int = 2
    post_taps: int = 2

    def __post_init__(self):
        if self.order < 1 or self.order % 2 == 0:
            raise InvalidInputError(f"nonlinearity order must be odd and >= 1, got {self.order}")
        if self.pre_taps < 0 or self.post_taps < 0:
            raise InvalidInputError("memory depths must be non-negative")

    @property
    def orders(self) -> tuple:
        return tuple(range(1, self.order + 1, 2))

    @property
    def delays(self) -> np.ndarray:
        return np.arange(-self.pre_taps, self.post_taps + 1)

    @property
    def taps_per_branch(self) -> int:
        return self.pre_taps + self.post_taps + 1

    @property
    def n_coeffs(self) -> int:
        return len(self.orders) * self.taps_per_branch


@dataclass(frozen=True, eq=False)
class PHModel:
    """Fitted coefficients, flat and p-major: ``f[1,-pre] ... f[1,post], f[3,-pre] ...``."""

    cfg: PHConfig
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128).reshape(-1)
        if c.size != self.cfg.n_coeffs:
            raise InvalidInputError(f"expected {self.cfg.n_coeffs} coefficients, got {c.size}")
        if not np.all(np.isfinite(c)):
            raise InvalidInputError("coefficients must be finite")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    def branch(self, p: int) -> np.ndarray:
        """Branch FIR of order ``p`` over delays ``-pre .. post``."""
        i = self.cfg.orders.index(p)
        n = self.cfg.taps_per_branch
        return self.coeffs[i * n:(i + 1) * n]

    def coefficient(self, p: int, k: int) -> complex:
        return complex(self.branch(p)[k + self.cfg.pre_taps])


@dataclass(frozen=True, eq=False)
class RegressionMatrix:
    """Basis matrix with columns scaled to unit RMS; ``columns * column_scales`` is the raw basis."""

    cfg: PHConfig
    columns: np.ndarray
    column_scales: np.ndarray

    @property
    def raw(self) -> np.ndarray:
        return self.columns * self.column_scales

    @property
    def shape(self):
        return self.columns.shape


def ph_basis(x, p: int):
    """``|x|^(p-1) * x`` for odd ``p >= 1``; works elementwise on arrays."""
    if not isinstance(p, (int, np.integer)) or p < 1 or p % 2 == 0:
        raise InvalidInputError(f"basis order must be an odd positive integer, got {p}")
    x = np.asarray(x, dtype=np.complex128)
    if p == 1:
        return x.copy() if x.ndim else complex(x)
    out = np.abs(x) ** (p - 1) * x
    return out if out.ndim else complex(out)


def _check_window(n_samples: int, cfg: PHConfig, start: int, L: int):
    if L < 1:
        raise InvalidInputError("window length must be positive")
    if start - cfg.post_taps < 0 or start + cfg.pre_taps + L > n_samples:
        raise InvalidInputError(
            f"reference needs samples [{start - cfg.post_taps}, {start + cfg.pre_taps + L - 1}] "
            f"but has {n_samples}"
        )


def build_regression_matrix(x: ComplexSignal, cfg: PHConfig, start: int, L: int) -> RegressionMatrix:
    """Row ``r``, column ``(p, k)`` holds ``psi_p(x[start + r - k])`` before scaling."""
    xs = x.samples
    _check_window(xs.size, cfg, start, L)
    cols = []
    for p in cfg.orders:
        basis = ph_basis(xs, p)
        for k in cfg.delays:
            cols.append(basis[start - k:start - k + L])
    raw = np.stack(cols, axis=1)
    scales = np.sqrt(np.mean(np.abs(raw) ** 2, axis=0))
    safe = np.where(scales > 0, scales, 1.0)
    return RegressionMatrix(cfg, raw / safe, safe)


def ls_estimate(psi: RegressionMatrix, x_rf) -> PHModel:
    """Least-squares fit of the observation onto the basis via a QR solve.

    The received signal of interest and noise are simply part of the residual.
    Raises :class:`EstimationError` if the scaled basis is numerically rank
    deficient.
    """
    y = x_rf.samples if isinstance(x_rf, ComplexSignal) else np.asarray(x_rf, dtype=np.complex128)
    A = psi.columns
    if y.size != A.shape[0]:
        raise InvalidInputError(f"observation has {y.size} samples, basis has {A.shape[0]} rows")
    if A.shape[0] < A.shape[1]:
        raise InvalidInputError(f"need at least {A.shape[1]} samples, got {A.shape[0]}")
    q, r = np.linalg.qr(A)
    sv = np.linalg.svd(r, compute_uv=False)
    cond = np.inf if sv[-1] == 0 else sv[0] / sv[-1]
    if not cond < MAX_CONDITION:
        raise EstimationError(f"basis matrix is rank deficient (condition estimate {cond:.3g})", cond)
    scaled = solve_triangular(r, q.conj().T @ y)
    return PHModel(psi.cfg, scaled / psi.column_scales)


def regenerate_si(x: ComplexSignal, model: PHModel, start: int, L: int) -> ComplexSignal:
    """Predicted SI over ``L`` samples from ``start``, summed branch by branch."""
    xs = x.samples
    cfg = model.cfg
    _check_window(xs.size, cfg, start, L)
    out = np.zeros(L, dtype=np.complex128)
    for p in cfg.orders:
        basis = ph_basis(xs, p)
        for k, c in zip(cfg.delays, model.branch(p)):
            if c != 0:
                out += c * basis[start - k:start - k + L]
    return x.with_samples(out)


def cancel(x_rf: ComplexSignal, x_si_hat: ComplexSignal) -> ComplexSignal:
    if len(x_rf) != len(x_si_hat):
        raise InvalidInputError(f"length mismatch: {len(x_rf)} vs {len(x_si_hat)}")
    return x_rf.with_samples(x_rf.samples - x_si_hat.samples)


def linear_estimate(x: ComplexSignal, x_rf, taps, start: int, L: int) -> PHModel:
    """Plain linear LS channel estimate: the ``p = 1`` branch with ``taps = (pre, post)``."""
    pre, post = taps
    cfg = PHConfig(order=1, pre_taps=pre, post_taps=post)
    return ls_estimate(build_regression_matrix(x, cfg, start, L), x_rf)


# ---------------------------------------------------------------------------
# Full-signal canceller with bulk delay alignment


def delay_samples(x: np.ndarray, d: int) -> np.ndarray:
    """Shift by ``d`` samples (negative advances), zero filled, same length."""
    out = np.zeros_like(x)
    if d >= 0:
        out[d:] = x[:x.size - d]
    else:
        out[:d] = x[-d:]
    return out


def _aligned(x: np.ndarray, d: int, cfg: PHConfig) -> ComplexSignal:
    """Reference delayed by ``d`` with room for every canceller tap.

    Element ``i`` holds ``x[i - post - d]``, zero outside the record, so the
    regression window starts at index ``post`` and no tap runs off either end.
    """
    out = np.zeros(x.size + cfg.pre_taps + cfg.post_taps, dtype=np.complex128)
    offset = cfg.post_taps + d
    lo, hi = max(0, offset), min(out.size, offset + x.size)
    if lo < hi:
        out[lo:hi] = x[lo - offset:hi - offset]
    return ComplexSignal(out, 1.0)


def estimate_delay(x: ComplexSignal, x_rf: ComplexSignal, cfg: PHConfig, n_est: int, max_lag: int = 8) -> int:
    """Bulk delay between the reference and the observation.

    A coarse lag is taken from the cross-correlation peak. At oversampled
    rates that peak cannot resolve individual taps, so the canceller window
    position is then refined around it by minimum linear-LS residual.
    """
    ys = x_rf.samples[:n_est]
    lags = np.arange(-max_lag, max_lag + 1)
    xc = [abs(np.vdot(delay_samples(x.samples, d)[:n_est], ys)) for d in lags]
    coarse = int(lags[int(np.argmax(xc))])

    lin = PHConfig(1, cfg.pre_taps, cfg.post_taps)
    span = cfg.pre_taps + cfg.post_taps
    best, best_res = coarse, np.inf
    for d in sorted(range(coarse - span, coarse + span + 1), key=lambda d: (abs(d - coarse), d)):
        psi = build_regression_matrix(_aligned(x.samples, d, lin), lin, lin.post_taps, n_est)
        try:
            model = ls_estimate(psi, ys)
        except EstimationError:
            continue
        res = np.sum(np.abs(ys - psi.raw @ model.coeffs) ** 2)
        if res < best_res * (1 - 1e-9):
            best, best_res = d, res
    return best


@dataclass(frozen=True)
class SICanceller:
    """A fitted model together with the reference delay it was fitted at."""

    model: PHModel
    delay: int = 0

    def regenerate(self, x: ComplexSignal) -> ComplexSignal:
        cfg = self.model.cfg
        ref = _aligned(x.samples, self.delay, cfg)
        return x.with_samples(regenerate_si(ref, self.model, cfg.post_taps, len(x)).samples)

    def apply(self, x: ComplexSignal, x_rf: ComplexSignal) -> ComplexSignal:
        return cancel(x_rf, self.regenerate(x))


def fit_canceller(
    x: ComplexSignal,
    x_rf: ComplexSignal,
    cfg: PHConfig,
    n_est: int,
    align: bool = True,
    max_lag: int = 8,
) -> SICanceller:
    """Fit ``cfg`` on the first ``n_est`` samples of the transmit reference and observation."""
    if n_est > min(len(x), len(x_rf)):
        raise InvalidInputError("estimation window exceeds the available samples")
    d = estimate_delay(x, x_rf, cfg, n_est, max_lag) if align else 0
    psi = build_regression_matrix(_aligned(x.samples, d, cfg), cfg, cfg.post_taps, n_est)
    return SICanceller(ls_estimate(psi, x_rf.samples[:n_est]), d)
