//! Exact computations with elementary-type cyclotomic pro-p pairs: unit
//! groups, expression trees, truncated cohomology rings, rigidity, concrete
//! field models and a cocycle oracle for small finite groups.

pub mod cohomology;
pub mod field;
pub mod linalg;
pub mod oracle;
pub mod pair;
pub mod parse;
pub mod rigidity;
pub mod units;

pub use pair::{Ambient, DemuskinCase, FExponent, PAdicBlock, PairError, PairExpr};
pub use parse::parse_pair;
