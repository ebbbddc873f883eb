"""Basic hypergeometric eigenfunctions of the Askey-Wilson second-order
difference operator, with randomized verification of their identities."""
from .awcore import (AWParams, HeckeParams, QPower, apply_D, apply_L, coeff_A, derive_aw, dual,
                     specialize_J, specialize_R)
from .eigenfun import (E_aw, Phi, Psi, St, St_dual, W_fn, aw_polynomial, cfun, phi_tilde,
                       poly_constant_E, poly_constant_phi, psi_from_aw, spectral_point)
from .idcheck import CHECKS, IdentityReport, SamplePolicy, run_all
from .qcore import (DEFAULT_TOL, ConvergenceRegionError, DegeneracyError, DomainError, PoleError,
                    QSeriesError, SeriesValue, Tolerance, phi_series, qpochhammer_finite,
                    qpochhammer_inf, qpochhammer_multi, qpow, theta, theta_multi, w8_7)

__version__ = "0.1.0"
