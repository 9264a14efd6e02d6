//! Type-I and interval/general type-II fuzzy sets with the operations needed to
//! build type-II fuzzy controllers: extension-principle arithmetic, join and
//! meet, type reduction (brute force, closed-form approximations and the exact
//! Karnik–Mendel iteration) and rule-based inference with table-lookup learning.

pub mod error;
pub mod fls;
pub mod reduction;
pub mod t1;
pub mod t2;

pub use error::{FuzzyError, Result};
pub use t1::{FuzzyNumber, GaussianT1, GridSet, GridSpec, IntervalT1, MembershipFunction, TNorm};
pub use t2::{GeneralT2Discrete, It2Set, SecondarySlice};
pub use fls::{LabelSet, LinguisticVariable, Rule, RuleBank, RuleBase};
