"""Closed-form quadrature moments <(a+a^dag)^k> on displaced squeezed probes.

The general-phase formula is

    <G_zeta> = eta^zeta * sum_{k,s} C(zeta,k,s) e^(i psi (zeta-2k-2s))
               conj(beta)^s beta^(zeta-2k-s)

with (mu, nu, beta, eta, psi) from probe.bogoliubov_view. Every QFI element
in this package is a combination of these moments, so their precision
budget (compensated summation, exact coefficients, optional extended
precision) is set here and nowhere else.

Bogoliubov amplitude convention
-------------------------------
``beta_sign`` selects the sign of the nu*conj(alpha) term in the
transformed displacement:

* ``+1`` (default): beta = mu alpha + nu conj(alpha). This is the amplitude
  the closed-form bound family, the asymptotic expansions and the optimal
  squeezing-fraction results of this package are built on.
* ``-1``: beta = mu alpha - nu conj(alpha). This reproduces, to machine
  precision, the moments of the Fock-basis state D(alpha)S(xi)|0> that the
  brute-force oracle constructs.

The two agree whenever the probe is purely coherent (gamma = 0) or purely
squeezed (gamma = 1) and differ for mixed probes. See README, "Moment
conventions", for the full story.
"""

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath

from .combinatorics import normal_order_coeff
from .errors import DomainError, InternalConsistencyError
from .probe import ProbeSpec, bogoliubov_view

__all__ = ["MomentVector", "moment_general", "moment_real_axis", "moment_vector"]

IMAG_RESIDUE_TOL = 1e-10
EXTENDED_DPS = 40  # working digits of the extended-precision path


@lru_cache(maxsize=None)
def _terms(zeta: int):
    """(k, s, coefficient, phase multiplier) for every normal-ordering term."""
    out = []
    for k in range(zeta // 2 + 1):
        for s in range(zeta - 2 * k + 1):
            out.append((k, s, normal_order_coeff(zeta, k, s), zeta - 2 * k - 2 * s))
    return tuple(out)


@lru_cache(maxsize=None)
def _terms_float(zeta: int):
    """Same table with the exact coefficients converted to float once."""
    return tuple((k, s, float(c), ph) for k, s, c, ph in _terms(zeta))


@lru_cache(maxsize=None)
def _row_sums(zeta: int):
    """Exact sum over s of C(zeta,k,s) for each k (the theta=phi=0 collapse)."""
    sums = []
    for k in range(zeta // 2 + 1):
        sums.append(
            sum((normal_order_coeff(zeta, k, s) for s in range(zeta - 2 * k + 1)), Fraction(0))
        )
    return tuple(sums)


@lru_cache(maxsize=None)
def _row_sums_float(zeta: int):
    return tuple(float(c) for c in _row_sums(zeta))


def _kahan_complex(terms):
    """Compensated sum, largest magnitude first, deterministic order."""
    total = 0j
    comp = 0j
    for t in sorted(terms, key=abs, reverse=True):
        y = t - comp
        s = total + y
        comp = (s - total) - y
        total = s
    return total


def _check_beta_sign(beta_sign):
    if beta_sign not in (+1, -1):
        raise DomainError(f"beta_sign must be +1 or -1, got {beta_sign}")


def moment_general(probe: ProbeSpec, k: int, *, beta_sign: int = +1, extended: bool = False) -> float:
    """Expectation value <G_k> on the probe, general phases.

    The internal sum is complex; its imaginary residue must stay below
    1e-10 relative or the phase bookkeeping is broken and an
    InternalConsistencyError is raised.
    """
    if k < 0:
        raise DomainError(f"moment order must be >= 0, got {k}")
    _check_beta_sign(beta_sign)
    if k == 0:
        return 1.0
    if extended:
        return float(_moment_general_mp(probe, k, beta_sign))

    view = bogoliubov_view(probe)
    beta = view.mu * probe.alpha + beta_sign * view.nu * probe.alpha.conjugate()
    betac = beta.conjugate()
    terms = [
        coeff * cmath.exp(1j * view.psi * ph) * betac**s * beta ** (k - 2 * kk - s)
        for kk, s, coeff, ph in _terms_float(k)
    ]
    total = view.eta**k * _kahan_complex(terms)
    scale = max(1.0, abs(total.real))
    if abs(total.imag) > IMAG_RESIDUE_TOL * scale:
        raise InternalConsistencyError(
            f"imaginary residue {total.imag:.3e} exceeds tolerance for k={k} probe={probe}"
        )
    return total.real


def _moment_general_mp(probe: ProbeSpec, k: int, beta_sign: int):
    """Extended-precision twin of moment_general (mpmath, EXTENDED_DPS digits)."""
    with mpmath.workdps(EXTENDED_DPS):
        n_sq = mpmath.mpf(probe.gamma) * mpmath.mpf(probe.n_total)
        n_ch = (1 - mpmath.mpf(probe.gamma)) * mpmath.mpf(probe.n_total)
        r = mpmath.asinh(mpmath.sqrt(n_sq))
        alpha = mpmath.sqrt(n_ch) * mpmath.expj(mpmath.mpf(probe.phi))
        mu = mpmath.cosh(r)
        nu = mpmath.expj(mpmath.mpf(probe.theta)) * mpmath.sinh(r)
        beta = mu * alpha + beta_sign * nu * mpmath.conj(alpha)
        eta = abs(mu + nu)
        psi = mpmath.arg(mu + mpmath.conj(nu))
        total = mpmath.mpc(0)
        for kk, s, coeff, ph in _terms(k):
            c = mpmath.mpf(coeff.numerator) / mpmath.mpf(coeff.denominator)
            total += c * mpmath.expj(psi * ph) * mpmath.conj(beta) ** s * beta ** (k - 2 * kk - s)
        total = eta**k * total
        scale = max(1, abs(mpmath.re(total)))
        if abs(mpmath.im(total)) > IMAG_RESIDUE_TOL * scale:
            raise InternalConsistencyError(
                f"imaginary residue in extended mode for k={k} probe={probe}"
            )
        return mpmath.re(total)


def moment_real_axis(alpha: float, r: float, k: int, *, beta_sign: int = +1, extended: bool = False) -> float:
    """<G_k> for theta = phi = 0, alpha >= 0, via the collapsed row-sum form.

    Written as sum_j c_j alpha^(k-2j) E^(p(j)) with E = e^(2r), c_j the exact
    row sums and p(j) = k-j (beta_sign +1) or j (beta_sign -1). The printed
    single-prefactor form divides by alpha, so alpha = 0 is handled here by
    the 0^0 = 1 convention: only the fully contracted term survives.
    """
    if alpha < 0 or r < 0:
        raise DomainError("moment_real_axis expects alpha >= 0 and r >= 0")
    if k < 0:
        raise DomainError(f"moment order must be >= 0, got {k}")
    _check_beta_sign(beta_sign)
    if k == 0:
        return 1.0
    if extended:
        with mpmath.workdps(EXTENDED_DPS):
            E = mpmath.exp(2 * mpmath.mpf(r))
            a = mpmath.mpf(alpha)
            total = mpmath.mpf(0)
            for j, c in enumerate(_row_sums(k)):
                p = k - j if beta_sign > 0 else j
                cf = mpmath.mpf(c.numerator) / mpmath.mpf(c.denominator)
                total += cf * a ** (k - 2 * j) * E**p
            return float(total)
    E = math.exp(2.0 * r)
    terms = []
    for j, c in enumerate(_row_sums_float(k)):
        p = k - j if beta_sign > 0 else j
        terms.append(c * alpha ** (k - 2 * j) * E**p)
    total = 0.0
    comp = 0.0
    for t in sorted(terms, key=abs, reverse=True):
        y = t - comp
        s = total + y
        comp = (s - total) - y
        total = s
    return total


@dataclass(frozen=True)
class MomentVector:
    """Moments <G_0>..<G_k_max> of one probe, index k equals moment order."""

    probe: ProbeSpec
    k_max: int
    values: tuple

    def __getitem__(self, k):
        return self.values[k]


def moment_vector(probe: ProbeSpec, k_max: int, *, beta_sign: int = +1, extended: bool = False) -> MomentVector:
    if k_max < 0:
        raise DomainError(f"k_max must be >= 0, got {k_max}")
    vals = tuple(
        moment_general(probe, k, beta_sign=beta_sign, extended=extended)
        for k in range(k_max + 1)
    )
    return MomentVector(probe=probe, k_max=k_max, values=vals)
