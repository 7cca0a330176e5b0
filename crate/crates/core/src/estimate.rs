//! Output types shared by the general-model and state-space estimators.

use std::fmt;

use crate::linalg::Matrix;
use crate::scalar::Real;

/// Which estimator produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ImportanceSampling,
    Quadrature,
    ClosedForm,
    FiniteDifference,
    FixedLagSmc,
    Oracle,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ImportanceSampling => "importance-sampling",
            Method::Quadrature => "quadrature",
            Method::ClosedForm => "closed-form",
            Method::FiniteDifference => "finite-difference",
            Method::FixedLagSmc => "fixed-lag-smc",
            Method::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Provenance attached to every score or information estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateMeta<T> {
    pub method: Method,
    /// Perturbation scale, when the method has one.
    pub tau: Option<T>,
    /// Finite-difference step, when the method has one.
    pub h: Option<T>,
    /// Samples, particles or grid nodes.
    pub n: usize,
}

impl<T> EstimateMeta<T> {
    pub fn new(method: Method, n: usize) -> Self {
        Self { method, tau: None, h: None, n }
    }

    pub fn with_tau(mut self, tau: T) -> Self {
        self.tau = Some(tau);
        self
    }

    pub fn with_h(mut self, h: T) -> Self {
        self.h = Some(h);
        self
    }
}

/// Estimate of the gradient of the log-likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector<T> {
    pub values: Vec<T>,
    pub meta: EstimateMeta<T>,
}

/// Estimate of the negative Hessian of the log-likelihood. Always exactly
/// symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoMatrix<T> {
    values: Matrix<T>,
    pub meta: EstimateMeta<T>,
}

impl<T: Real> InfoMatrix<T> {
    /// Wraps `values` after symmetrizing them.
    pub fn new(values: Matrix<T>, meta: EstimateMeta<T>) -> Self {
        Self { values: values.symmetrized(), meta }
    }

    pub fn values(&self) -> &Matrix<T> {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[(i, j)]
    }
}
