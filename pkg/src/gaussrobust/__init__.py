"""Robust classification under worst-case Gaussian perturbations.

Linear, kernelized and multiclass trainers for the smooth robust hinge loss,
the closed-form adversarial covariance choices, an alternating ball-adversary
baseline, and dual certificates that validate trained models.
"""

from .certify import (
    DualCertificate,
    NormRestoration,
    build_certificate,
    check_constraint_shapes,
    restore_norm,
)
from .data import (
    DataFormatError,
    Dataset,
    SplitSpec,
    gen_gaussian_toy,
    gen_radial_ring,
    inject_uniform_noise,
    load_libsvm,
    save_libsvm,
    split_dataset,
)
from .experiments import SweepSpec, accuracy, run_noise_curve, run_sweep
from .kernels import (
    KernelKind,
    KernelModel,
    KernelSpec,
    gram_matrix,
    ken_guru_step,
    kernel_predict,
    train_ken_guru,
)
from .linear import (
    RefineResult,
    TrainConfig,
    TrainReport,
    batch_refine,
    train_asvc,
    train_baseline_svm,
    train_guru,
)
from .multiclass import (
    MulticlassTrainReport,
    multiclass_asvc_loss,
    multiclass_predict,
    train_m_guru,
    train_m_guru_s2,
)
from .robust import (
    CovarianceChoice,
    CovarianceConstraint,
    LinearModel,
    MulticlassModel,
    adversarial_covariance,
    adversarial_covariance_is_optimal,
    asvc_displacement,
    asvc_robust_hinge,
    multiclass_sum_gradient,
    multiclass_sum_loss,
    robust_hinge,
    robust_hinge_gradient,
)
from .scalars import (
    ConjugateDual,
    ScalarLoss,
    conjugate_value,
    gauss_cdf,
    gauss_cdf_inv,
    loss_derivative,
    loss_value,
    perspective,
    smooth_hinge,
    smooth_hinge_deriv,
    smooth_hinge_second,
)
from .serialize import load_model, save_model

__version__ = "0.1.0"
