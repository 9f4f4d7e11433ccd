//! Optional per-packet event trace: one structured record per enqueue,
//! dequeue, drop, and delivery, in line-delimited JSON.

use std::io::Write;

use serde::Serialize;

use crate::time::Nanos;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceEvent<'a> {
    pub t_ns: Nanos,
    /// One of "enqueue", "dequeue", "drop", "deliver".
    pub event: &'a str,
    pub station: u16,
    pub flow: u32,
    pub seq: u64,
    pub len: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<&'a str>,
}

pub trait TraceSink {
    fn record(&mut self, ev: &TraceEvent<'_>) -> std::io::Result<()>;
}

/// Writes one JSON object per line.
#[derive(Debug)]
pub struct JsonlTrace<W: Write> {
    out: W,
}

impl<W: Write> JsonlTrace<W> {
    pub fn new(out: W) -> Self {
        JsonlTrace { out }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> TraceSink for JsonlTrace<W> {
    fn record(&mut self, ev: &TraceEvent<'_>) -> std::io::Result<()> {
        serde_json::to_writer(&mut self.out, ev)?;
        self.out.write_all(b"\n")
    }
}
