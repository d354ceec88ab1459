"""opkernel: operator-valued positive definite kernels at desk scale.

Matrix-valued translation-invariant kernels built as finite nonnegative
operator-measure mixtures of scalar families (gaussian, askey, omega,
plane wave), their derivative kernels via symbolic radial jets, the
induced reproducing-kernel quadratic forms, exact strict-PD/universality
classification of radial mixtures, and numerical certification demos.
"""

__version__ = "0.1.0"
