//! Builders for the concrete machines.

pub mod loglog;
pub mod minsky;
pub mod p4ca;
pub mod padding;
pub mod ulog;

pub use loglog::{
    build_loglog_equaltime, build_loglog_oneway, EqualTimeLayout, Extents, LoglogMachine,
    LoglogState,
};
pub use minsky::{
    minsky_lockstep, minsky_two_counter, predicted_accept_instants_2c, BudgetRule, Lockstep,
    MinskyCostModel, MinskyMachine,
    MinskyState, SyntheticMachine, SynState,
};
pub use p4ca::{build_p4ca, P4caMachine, P4caPhase, P4caState};
pub use padding::{pad_input, pad_to_realtime, unpad, PadError, PadState, Padded, PAD};
pub use ulog::{build_ulog_machine, UlogLayout, UlogMachine, UlogState};
