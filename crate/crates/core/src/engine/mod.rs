//! Message-passing simulation of the interferometer.
//!
//! Photons are messengers carrying a clock-hand [`Message`]. Beam splitters
//! are stateful processors ([`BeamSplitter`]) whose registers and learning
//! vector persist from one messenger to the next, and the [`MziNetwork`]
//! wires two of them around a fixed lower arm and a switched upper arm.

mod beam_splitter;
mod message;
mod network;

pub use beam_splitter::{BeamSplitter, Routing, INTEGRITY_TOLERANCE};
pub use message::{reduce_phase, Message};
pub use network::{DetectionEvent, InitPolicy, MziNetwork};

/// Input or output port of a two-port processor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    Zero,
    One,
}

impl Channel {
    pub fn index(self) -> usize {
        match self {
            Channel::Zero => 0,
            Channel::One => 1,
        }
    }
}
