//! Reference oracles for the recognized languages.

pub mod loglog;
pub mod unary;

pub use loglog::{
    loglog_generate, loglog_member, loglog_validate, loglog_word, FailureReason, LoglogConfig,
    LoglogError, Rejection,
};
pub use unary::{bin_str, classify_unary, up4ca_lengths, ulog_lengths, Membership, UnaryFamily};
