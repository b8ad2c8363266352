//! Parent-identifying set systems and codes.
//!
//! A distributor hands out blocks of a set system (or codewords of a code) to
//! users. A coalition of at most `t` users combines what it holds to forge a
//! new descendant object. A family is *t-parent-identifying* when every
//! producible descendant still pins down at least one member common to all
//! coalitions that could have produced it.
//!
//! The crate provides the data model ([`model`]), the descendant channels and
//! generic scheme verifiers ([`fchannel`]), constructions, checkers and
//! tracing for set systems ([`ipps`]) and for codes ([`mippc`]), closed-form
//! size and rate bounds in exact arithmetic ([`bounds`]), and exhaustive
//! maximum-size search ([`search`]). The `pidkit` binary exposes all of it on
//! the command line ([`cli`]).

pub mod bounds;
pub mod cli;
pub mod fchannel;
pub mod ipps;
pub mod mippc;
pub mod model;
pub mod search;

pub(crate) mod bits;
pub(crate) mod combi;

use serde::Serialize;
use thiserror::Error;

/// Why tracing a descendant back to coalition members failed.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum TraceError {
    /// No coalition of the allowed size can produce the descendant.
    #[error("descendant is not producible by any coalition of size at most {t}")]
    NotProducible { t: u32 },
    /// The descendant is producible, but the producing coalitions share no member.
    #[error("producing coalitions share no common member")]
    EmptyIntersection,
}
