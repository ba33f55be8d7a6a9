//! Length-prefixed JSON framing.
//!
//! ```text
//! +--------------------+---------------------------------+
//! | u32 big-endian len | len bytes of UTF-8 JSON payload |
//! +--------------------+---------------------------------+
//! ```

use thiserror::Error;

use super::message::Envelope;

pub const HEADER_LEN: usize = 4;
pub const MAX_PAYLOAD_LEN: usize = 65_536;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    /// Not an error in stream context: wait for more bytes.
    #[error("frame incomplete, {needed} more byte(s) required")]
    Truncated { needed: usize },
    #[error("declared frame length {0} exceeds the {MAX_PAYLOAD_LEN}-byte limit")]
    OversizedLength(u64),
    #[error("encoded message is {0} bytes, over the {MAX_PAYLOAD_LEN}-byte limit")]
    OversizedPayload(usize),
    #[error("corrupt payload: {0}")]
    CorruptPayload(String),
    #[error("invalid message: {0}")]
    InvalidMessage(&'static str),
}

impl CodecError {
    /// Whether the stream can no longer be trusted.
    pub fn is_fatal(&self) -> bool {
        !matches!(self, Self::Truncated { .. })
    }
}

pub fn encode(envelope: &Envelope) -> Result<Vec<u8>, CodecError> {
    envelope.message.validate().map_err(CodecError::InvalidMessage)?;
    let payload = serde_json::to_vec(envelope).map_err(|e| CodecError::CorruptPayload(e.to_string()))?;
    if payload.len() > MAX_PAYLOAD_LEN {
        return Err(CodecError::OversizedPayload(payload.len()));
    }
    let mut frame = Vec::with_capacity(HEADER_LEN + payload.len());
    frame.extend_from_slice(&(payload.len() as u32).to_be_bytes());
    frame.extend_from_slice(&payload);
    Ok(frame)
}

/// Decodes the first frame in `bytes`, returning it with whatever follows.
pub fn decode(bytes: &[u8]) -> Result<(Envelope, &[u8]), CodecError> {
    if bytes.len() < HEADER_LEN {
        return Err(CodecError::Truncated { needed: HEADER_LEN - bytes.len() });
    }
    let len = u32::from_be_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]) as usize;
    if len > MAX_PAYLOAD_LEN {
        return Err(CodecError::OversizedLength(len as u64));
    }
    let end = HEADER_LEN + len;
    if bytes.len() < end {
        return Err(CodecError::Truncated { needed: end - bytes.len() });
    }
    let envelope: Envelope =
        serde_json::from_slice(&bytes[HEADER_LEN..end]).map_err(|e| CodecError::CorruptPayload(e.to_string()))?;
    envelope.message.validate().map_err(CodecError::InvalidMessage)?;
    Ok((envelope, &bytes[end..]))
}

/// Reassembles frames from arbitrarily chunked stream reads.
#[derive(Debug, Default)]
pub struct FrameReader {
    buf: Vec<u8>,
}

impl FrameReader {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    pub fn buffered(&self) -> usize {
        self.buf.len()
    }

    /// Next complete frame, `Ok(None)` if more bytes are needed.
    /// After a fatal error the buffer is left untouched.
    pub fn next_frame(&mut self) -> Result<Option<Envelope>, CodecError> {
        match decode(&self.buf) {
            Ok((envelope, rest)) => {
                let consumed = self.buf.len() - rest.len();
                self.buf.drain(..consumed);
                Ok(Some(envelope))
            }
            Err(CodecError::Truncated { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }
}
