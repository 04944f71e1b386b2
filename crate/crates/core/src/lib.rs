//! Certified arithmetic for sums of square roots near integers.
//!
//! * [`bigfix`]: dyadic fixed point and outward-rounded intervals.
//! * [`numbertheory`]: squares, squarefree parts, 64-bit factorization.
//! * [`rootsum`]: signed root sums, exact integrality, separation bounds,
//!   certified distance to the nearest integer.
//! * [`search`]: exhaustive and meet-in-the-middle searches, identity
//!   families, binomial cancellation.
//! * [`expsum`]: exponential sums `Σ e(ℓ√a)`, the hat kernel and the
//!   Fourier counting identity.
//! * [`gaps`]: gap statistics of `{√a₁ + ⋯ + √a_k mod 1}`.
//! * [`known`]: regression over the published numerical examples.

pub mod bigfix;
pub mod numbertheory;
pub(crate) mod frac;
pub mod rootsum;
pub mod search;
pub mod expsum;
pub mod gaps;
pub mod known;
