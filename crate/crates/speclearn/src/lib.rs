//! Learning minimal temporal-logic formulas (LTL, CTL, ATL) that separate
//! positive from negative behavior examples, together with generators for
//! the hitting-set and coset-weight reduction gadgets and brute-force oracles
//! that certify them.
//!
//! Start with the runnable examples (`cargo run --example learn_from_words`)
//! or the [`learner`] and [`gadgets`] modules.

pub mod canon;
pub mod checker;
pub mod cli;
pub mod formula;
pub mod gadgets;
pub mod learner;
pub mod models;
pub mod selftest;
