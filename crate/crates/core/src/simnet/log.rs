//! Emission log: one tab-separated line per event,
//! `time_us  node  kind  name_hex  reason`, with `-` for an empty field.

use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LogKind {
    Inject,
    SendInterest,
    SendContent,
    Deliver,
    Drop,
    CacheHit,
    CacheInsert,
    CacheExpire,
    PitAggregate,
    BatchQueued,
    Processed,
}

impl LogKind {
    pub const ALL: [LogKind; 11] = [
        Self::Inject,
        Self::SendInterest,
        Self::SendContent,
        Self::Deliver,
        Self::Drop,
        Self::CacheHit,
        Self::CacheInsert,
        Self::CacheExpire,
        Self::PitAggregate,
        Self::BatchQueued,
        Self::Processed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Inject => "inject",
            Self::SendInterest => "send_interest",
            Self::SendContent => "send_content",
            Self::Deliver => "deliver",
            Self::Drop => "drop",
            Self::CacheHit => "cache_hit",
            Self::CacheInsert => "cache_insert",
            Self::CacheExpire => "cache_expire",
            Self::PitAggregate => "pit_aggregate",
            Self::BatchQueued => "batch_queued",
            Self::Processed => "processed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogRecord {
    pub time_us: u64,
    pub node: String,
    pub kind: LogKind,
    /// Wire encoding of the message name.
    pub name: Vec<u8>,
    pub reason: String,
}

impl LogRecord {
    pub fn write_line(&self, out: &mut String) {
        let name = if self.name.is_empty() {
            "-".to_string()
        } else {
            hex::encode(&self.name)
        };
        let reason = if self.reason.is_empty() {
            "-"
        } else {
            self.reason.as_str()
        };
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            self.time_us,
            self.node,
            self.kind.as_str(),
            name,
            reason
        );
    }

    pub fn parse_line(line: &str) -> Option<Self> {
        let mut f = line.split('\t');
        let time_us = f.next()?.parse().ok()?;
        let node = f.next()?.to_string();
        let kind = LogKind::parse(f.next()?)?;
        let name = match f.next()? {
            "-" => Vec::new(),
            h => hex::decode(h).ok()?,
        };
        let reason = match f.next()? {
            "-" => String::new(),
            r => r.to_string(),
        };
        if f.next().is_some() {
            return None;
        }
        Some(Self {
            time_us,
            node,
            kind,
            name,
            reason,
        })
    }
}

pub fn render(records: &[LogRecord]) -> String {
    let mut out = String::with_capacity(records.len() * 64);
    for r in records {
        r.write_line(&mut out);
    }
    out
}

/// Parses a rendered log; returns the 1-based number of the first bad line on error.
pub fn parse(text: &str) -> Result<Vec<LogRecord>, usize> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| LogRecord::parse_line(l).ok_or(i + 1))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_round_trip() {
        let r = LogRecord {
            time_us: 1500,
            node: "r1".into(),
            kind: LogKind::Drop,
            name: vec![0xab, 0x01],
            reason: "duplicate_nonce".into(),
        };
        let mut s = String::new();
        r.write_line(&mut s);
        assert_eq!(s, "1500\tr1\tdrop\tab01\tduplicate_nonce\n");
        assert_eq!(parse(&s).unwrap(), vec![r]);
        let blank = LogRecord {
            time_us: 0,
            node: "c".into(),
            kind: LogKind::Inject,
            name: vec![],
            reason: String::new(),
        };
        let text = render(std::slice::from_ref(&blank));
        assert_eq!(text, "0\tc\tinject\t-\t-\n");
        assert_eq!(parse(&text).unwrap(), vec![blank]);
        assert_eq!(parse("x\ty"), Err(1));
    }
}
