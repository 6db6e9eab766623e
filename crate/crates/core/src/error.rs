use thiserror::Error;

use crate::expr::FuncLin;
use crate::interval::Interval;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A construction parameter is out of range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Branch-and-bound ran out of subinterval evaluations.
    #[error("budget of {evaluations} evaluations exhausted; best enclosure {best}")]
    Budget { evaluations: usize, best: Interval },

    #[error("bound certificate {bound} violated on {subset}: enclosure {enclosure}")]
    CertificateViolation {
        bound: String,
        subset: String,
        enclosure: Interval,
    },

    /// An identity that must hold exactly left a residual.
    #[error("construction bug: expected exact zero, residual {}", .residual.summary())]
    ConstructionBug { residual: Box<FuncLin> },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// The search gave up. This says nothing about whether a witness exists.
    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
