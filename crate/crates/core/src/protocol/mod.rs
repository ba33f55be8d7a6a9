//! Base-station/rover wire protocol: framed JSON over a TCP control channel
//! and a UDP telemetry channel.

pub mod codec;
pub mod datagram;
pub mod link;
pub mod message;
pub mod net;
pub mod session;

pub use codec::{decode, encode, CodecError, FrameReader, MAX_PAYLOAD_LEN};
pub use datagram::{Intake, TelemetryReceiver, TelemetrySender};
pub use link::{link_quality, LinkBudget, LinkQuality};
pub use message::{Envelope, Message, ScienceAction};
pub use session::{ControlSession, Liveness, Role, SessionConfig, SessionError};
