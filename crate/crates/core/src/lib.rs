//! Exponential tail bounds for sums of M-acceptable random variables.
//!
//! The crate is organised around the constant
//! `K = (E|X|^2)^{1/2} * E exp(delta |X|)` of a marginal law and the two-sided
//! bound
//!
//! ```text
//! P(|S_n - E S_n| > n eps) <= 2 M exp(-(n delta / 2) (eps - K)),   eps >= K
//! ```
//!
//! together with everything needed to check it without trusting it:
//!
//! * [`scalar`] evaluates the real inequalities `e^x <= 1 + x + (|x|/2) e^{|x|}`
//!   and `e^x <= 1 + x + (x^2/2) e^{|x|}` over the whole real line.
//! * [`catalog`] holds marginal laws with closed-form moments.
//! * [`families`] builds negatively associated joint laws and estimates their
//!   acceptability ratios; it also computes exact END constants.
//! * [`bounds`] evaluates every bound in log-domain.
//! * [`oracle`] gives exact sum distributions for finite supports.
//! * [`montecarlo`] runs seeded, shard-independent simulations and confronts
//!   the bounds with them.

// `!(a <= b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod bounds;
pub mod catalog;
pub mod ci;
mod error;
pub mod families;
pub mod montecarlo;
pub mod numeric;
pub mod oracle;
pub mod parallel;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
