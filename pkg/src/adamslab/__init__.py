"""Numerics for sharp exponential-integral inequalities of Adams and Moser-Trudinger type
on measure spaces with homogeneous volume growth."""

from . import extremal, kernel, measure_space, mt, potential, rearrange, seqlemma
from .extremal import ExtremalFamily, kernel_power_family, moser_log, sharpness_probe
from .harness.report import CaseRecord, VerificationReport
from .harness.suites import run_suite
from .kernel import KernelSpec, damped_riesz, gradient_kernel, modified_riesz, riesz
from .measure_space import DomainError, RangeError, VolumeProfile, euclidean, heisenberg
from .mt import InequalityParams, gamma_sharp, heisenberg_A_gradient, msi_ratio
from .rearrange import GridFunction, decreasing_rearrangement

__version__ = "0.1.0"

__all__ = [
    "CaseRecord",
    "DomainError",
    "ExtremalFamily",
    "GridFunction",
    "InequalityParams",
    "KernelSpec",
    "RangeError",
    "VerificationReport",
    "VolumeProfile",
    "damped_riesz",
    "decreasing_rearrangement",
    "euclidean",
    "extremal",
    "gamma_sharp",
    "gradient_kernel",
    "heisenberg",
    "heisenberg_A_gradient",
    "kernel",
    "kernel_power_family",
    "measure_space",
    "modified_riesz",
    "moser_log",
    "msi_ratio",
    "mt",
    "potential",
    "rearrange",
    "riesz",
    "run_suite",
    "seqlemma",
    "sharpness_probe",
]
