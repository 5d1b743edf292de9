//! Numerics for twisted L-functions of half-integer weight cusp forms:
//! theta multipliers, eta-quotient expansions, additive twists,
//! amplified second moments, shifted convolution sums and the Selberg
//! transform machinery behind the geometric side.

pub mod amplifier;
pub mod arith;
pub mod chars;
pub mod geom;
pub mod lfunc;
pub mod qexp;
pub mod quad;
pub mod selberg;
pub mod shifted;
pub mod special;
