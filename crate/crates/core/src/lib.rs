//! Truth-table networks for tabular data.
//!
//! A [`net::TtnetModel`] binarizes its inputs, runs a bank of small
//! convolutional blocks over column windows and feeds their binary outputs to
//! a linear head. Every block reads at most nine bits, so it is enumerated
//! into a truth table and minimized into a DNF; bound to feature names,
//! those DNFs form a [`rules::RuleSet`] that scores rows exactly like the
//! network. The rule set can then be shrunk with don't-care terms and
//! filter deduplication, evaluated, edited as text, and drawn as decision
//! diagrams.

pub mod cli;
pub mod data;
pub mod error;
pub mod inference;
pub mod logic;
pub mod net;
pub mod robdd;
pub mod rules;
pub mod toy;

pub use error::{Error, Result};
