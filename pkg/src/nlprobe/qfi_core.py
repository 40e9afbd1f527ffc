"""Closed-form QFI matrix over (lambda, zeta) and the joint scalar bound.

The interaction is H = lambda_tilde (a+a^dag)^zeta; after absorbing the
interaction time, lambda = lambda_tilde * t is the effective coupling. The
coupling QFI is 4 Var(G_zeta) on the probe, the order QFI follows from the
power-rule derivative of the generator, and the two parameters are
compatible: both generators are powers of the same Hermitian quadrature, so
the Uhlmann antisymmetric part vanishes identically.
"""

import math
import warnings
from dataclasses import dataclass

from .errors import CancellationWarning, DegenerateModelError, DomainError, InternalConsistencyError
from .moments import moment_general
from .probe import ProbeSpec

__all__ = [
    "ModelSpec",
    "QfiMatrix",
    "qfi_lambda",
    "qfi_zeta",
    "qfi_cross",
    "qfi_matrix",
    "reparametrize_physical",
    "scalar_bound_inverse",
]

CANCELLATION_DIGITS = 1e-12
PSD_TOL = 1e-9


@dataclass(frozen=True)
class ModelSpec:
    """Nonlinear medium: effective coupling lambda = lambda_tilde * t, order zeta."""

    lambda_eff: float
    zeta: int
    time: float = 1.0

    def __post_init__(self):
        if not isinstance(self.zeta, int) or self.zeta < 1:
            raise DomainError(f"nonlinearity order must be an integer >= 1, got {self.zeta}")
        if not math.isfinite(self.lambda_eff) or self.lambda_eff < 0:
            raise DomainError(f"effective coupling must be finite and >= 0, got {self.lambda_eff}")
        if not self.time > 0:
            raise DomainError(f"interaction time must be > 0, got {self.time}")


@dataclass(frozen=True)
class QfiMatrix:
    """Symmetric 2x2 QFI over (lambda, zeta) plus the Uhlmann off-diagonal."""

    f_ll: float
    f_zz: float
    f_lz: float
    u_lz: float = 0.0

    def as_tuple(self):
        return (self.f_ll, self.f_zz, self.f_lz, self.u_lz)

    def determinant(self) -> float:
        return self.f_ll * self.f_zz - self.f_lz**2

    def is_positive_semidefinite(self, tol: float = PSD_TOL) -> bool:
        return (
            self.f_ll >= -tol
            and self.f_zz >= -tol
            and self.determinant() >= -tol * max(self.f_ll * self.f_zz, 1.0)
        )


def _variance_pair(probe, high, low, *, beta_sign, extended):
    """4 * (<G_high> - <G_low>^2) with a loss-of-precision alarm.

    In extended mode the subtraction happens inside the working-precision
    context; rounding the operands to double first would forfeit exactly the
    digits the mode exists to preserve.
    """
    if extended:
        import mpmath

        from .moments import EXTENDED_DPS, _moment_general_mp

        with mpmath.workdps(EXTENDED_DPS):
            m_high = _moment_general_mp(probe, high, beta_sign)
            m_low = _moment_general_mp(probe, low, beta_sign)
            return float(4 * (m_high - m_low * m_low))
    m_high = moment_general(probe, high, beta_sign=beta_sign)
    m_low = moment_general(probe, low, beta_sign=beta_sign)
    diff = m_high - m_low**2
    if m_high != 0.0 and abs(diff) < CANCELLATION_DIGITS * abs(m_high):
        warnings.warn(
            f"variance of G_{low} lost >12 significant digits to cancellation "
            f"(terms ~{m_high:.3e}); consider extended=True",
            CancellationWarning,
            stacklevel=3,
        )
    return 4.0 * diff


def qfi_lambda(probe: ProbeSpec, model: ModelSpec, *, beta_sign: int = +1, extended: bool = False) -> float:
    """QFI for the effective coupling: 4 [<G_2z> - <G_z>^2].

    Independent of lambda by construction; only model.zeta is read.
    """
    return _variance_pair(probe, 2 * model.zeta, model.zeta, beta_sign=beta_sign, extended=extended)


def qfi_zeta(probe: ProbeSpec, model: ModelSpec, *, beta_sign: int = +1, extended: bool = False) -> float:
    """QFI for the nonlinearity order: 4 (lambda zeta)^2 [<G_2(z-1)> - <G_(z-1)>^2].

    At zeta = 1 the generator derivative is the identity (G_0 convention),
    whose variance vanishes, so the element is exactly zero.
    """
    z = model.zeta
    if z == 1:
        return 0.0
    var = _variance_pair(probe, 2 * (z - 1), z - 1, beta_sign=beta_sign, extended=extended)
    return (model.lambda_eff * z) ** 2 * var


def qfi_cross(probe: ProbeSpec, model: ModelSpec, *, beta_sign: int = +1, extended: bool = False) -> float:
    """Off-diagonal element: 4 lambda zeta [<G_(2z-1)> - <G_z><G_(z-1)>]."""
    z = model.zeta
    if extended:
        import mpmath

        from .moments import EXTENDED_DPS, _moment_general_mp

        with mpmath.workdps(EXTENDED_DPS):
            m_mixed = _moment_general_mp(probe, 2 * z - 1, beta_sign)
            m_z = _moment_general_mp(probe, z, beta_sign)
            m_zm1 = _moment_general_mp(probe, z - 1, beta_sign) if z > 1 else mpmath.mpf(1)
            return float(4 * model.lambda_eff * z * (m_mixed - m_z * m_zm1))
    m_mixed = moment_general(probe, 2 * z - 1, beta_sign=beta_sign)
    m_z = moment_general(probe, z, beta_sign=beta_sign)
    m_zm1 = moment_general(probe, z - 1, beta_sign=beta_sign)
    return 4.0 * model.lambda_eff * z * (m_mixed - m_z * m_zm1)


def qfi_matrix(probe: ProbeSpec, model: ModelSpec, *, beta_sign: int = +1, extended: bool = False) -> QfiMatrix:
    """Assemble the full matrix; u_lz is identically zero for this model.

    [G_zeta, G_(zeta-1)] = 0 because both are powers of the same Hermitian
    operator, so the mean SLD commutator (the Uhlmann element) vanishes and
    joint estimation carries no intrinsic quantum incompatibility.
    """
    kw = dict(beta_sign=beta_sign, extended=extended)
    return QfiMatrix(
        f_ll=qfi_lambda(probe, model, **kw),
        f_zz=qfi_zeta(probe, model, **kw),
        f_lz=qfi_cross(probe, model, **kw),
        u_lz=0.0,
    )


def reparametrize_physical(qfi: QfiMatrix, model: ModelSpec) -> QfiMatrix:
    """Congruence B F B^T with B = diag(t, 1), mapping lambda -> lambda_tilde."""
    t = model.time
    return QfiMatrix(
        f_ll=t * t * qfi.f_ll,
        f_zz=qfi.f_zz,
        f_lz=t * qfi.f_lz,
        u_lz=t * qfi.u_lz,
    )


def scalar_bound_inverse(qfi: QfiMatrix) -> float:
    """Inverse of the identity-weight scalar bound: det(F) / tr(F).

    Zero for a singular matrix (one parameter carries no information).
    """
    trace = qfi.f_ll + qfi.f_zz
    if trace <= 0.0:
        raise DegenerateModelError("QFI matrix trace is zero; no parameter is estimable")
    det = qfi.determinant()
    if det < 0.0:
        if det < -PSD_TOL * max(qfi.f_ll * qfi.f_zz, 1.0):
            raise InternalConsistencyError(f"QFI matrix has negative determinant {det:.3e}")
        det = 0.0
    return det / trace
