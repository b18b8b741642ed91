//! Links, path sets, model configuration and the text formats they are
//! loaded from.
//!
//! Units are fixed throughout the crate: delays in seconds, bandwidths in
//! bits per second, sizes in bytes. The helpers in [`units`] are the only
//! place where factors of 8 and powers of ten appear.

use std::fmt;
use std::path::Path;

use thiserror::Error;

pub mod units {
    //! Unit conversions.

    pub const BITS_PER_BYTE: f64 = 8.0;

    pub fn mbps_to_bps(mbps: f64) -> f64 {
        mbps * 1e6
    }

    pub fn kbps_to_bps(kbps: f64) -> f64 {
        kbps * 1e3
    }

    pub fn bps_to_mbps(bps: f64) -> f64 {
        bps / 1e6
    }

    pub fn ms_to_s(ms: f64) -> f64 {
        ms / 1e3
    }

    pub fn s_to_ms(s: f64) -> f64 {
        s * 1e3
    }

    pub fn bytes_to_bits(bytes: f64) -> f64 {
        bytes * BITS_PER_BYTE
    }
}

/// Number of `s`-byte segments needed to carry `bytes` (rounded up).
pub fn segments_for_bytes(bytes: u64, s: u64) -> u64 {
    assert!(s > 0, "segment size must be positive");
    bytes.div_ceil(s)
}

/// Whole segments that fit in `bytes` (rounded down).
pub fn whole_segments_in(bytes: u64, s: u64) -> u64 {
    assert!(s > 0, "segment size must be positive");
    bytes / s
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("path set must contain at least one link")]
    NoLinks,
    #[error("link {link}: bandwidth must be positive (got {value})")]
    Bandwidth { link: usize, value: f64 },
    #[error("link {link}: delay must be non-negative (got {value})")]
    Delay { link: usize, value: f64 },
    #[error("segment_size_bytes must be positive")]
    SegmentSize,
    #[error("m_ack must be ≥ 1")]
    MAck,
    #[error("init_window_segments must be ≥ 1 (got {0})")]
    InitWindow(f64),
    #[error("ssthresh_segments must be ≥ init_window_segments ({ssthresh} < {init})")]
    Ssthresh { ssthresh: f64, init: f64 },
    #[error("transfer_bytes must be positive")]
    TransferBytes,
}

impl ValidationError {
    /// Name of the offending field, as it appears in scenario files.
    pub fn field(&self) -> String {
        match self {
            Self::NoLinks => "link".into(),
            Self::Bandwidth { link, .. } => format!("link.{link}.bandwidth_mbps"),
            Self::Delay { link, .. } => format!("link.{link}.delay_ms"),
            Self::SegmentSize => "segment_size_bytes".into(),
            Self::MAck => "m_ack".into(),
            Self::InitWindow(_) => "init_window_bytes".into(),
            Self::Ssthresh { .. } => "ssthresh_bytes".into(),
            Self::TransferBytes => "transfer_bytes".into(),
        }
    }
}

/// One path: forward bandwidth and one-way propagation delay.
///
/// The reverse direction is treated as instantaneous, so `prop_delay_s`
/// carries the whole round-trip propagation budget of the link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub bandwidth_bps: f64,
    pub prop_delay_s: f64,
}

impl Link {
    pub fn new(bandwidth_bps: f64, prop_delay_s: f64) -> Self {
        Self {
            bandwidth_bps,
            prop_delay_s,
        }
    }

    pub fn from_mbps_ms(mbps: f64, ms: f64) -> Self {
        Self::new(units::mbps_to_bps(mbps), units::ms_to_s(ms))
    }

    /// Time to clock `bytes` onto the link.
    pub fn serialization_s(&self, bytes: f64) -> f64 {
        units::bytes_to_bits(bytes) / self.bandwidth_bps
    }
}

/// Ordered set of links. Order is the round-robin dispatch order.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    links: Vec<Link>,
}

impl PathSet {
    pub fn new(links: Vec<Link>) -> Self {
        Self { links }
    }

    pub fn from_vectors(bandwidths_bps: &[f64], delays_s: &[f64]) -> Self {
        assert_eq!(bandwidths_bps.len(), delays_s.len());
        Self::new(
            bandwidths_bps
                .iter()
                .zip(delays_s)
                .map(|(&b, &d)| Link::new(b, d))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    /// Link by 1-based index.
    pub fn link(&self, index: usize) -> &Link {
        &self.links[index - 1]
    }

    pub fn delays(&self) -> Vec<f64> {
        self.links.iter().map(|l| l.prop_delay_s).collect()
    }

    pub fn bandwidths(&self) -> Vec<f64> {
        self.links.iter().map(|l| l.bandwidth_bps).collect()
    }

    pub fn aggregate_bandwidth_bps(&self) -> f64 {
        self.links.iter().map(|l| l.bandwidth_bps).sum()
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.links.is_empty() {
            return Err(ValidationError::NoLinks);
        }
        for (i, l) in self.links.iter().enumerate() {
            // NaN fails both comparisons.
            if !(l.bandwidth_bps > 0.0 && l.bandwidth_bps.is_finite()) {
                return Err(ValidationError::Bandwidth {
                    link: i + 1,
                    value: l.bandwidth_bps,
                });
            }
            if !(l.prop_delay_s >= 0.0 && l.prop_delay_s.is_finite()) {
                return Err(ValidationError::Delay {
                    link: i + 1,
                    value: l.prop_delay_s,
                });
            }
        }
        Ok(())
    }
}

/// Transport parameters shared by the model and the simulator.
///
/// Windows are in segments. Byte-valued windows are converted with
/// [`ModelConfig::from_byte_windows`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub segment_size_bytes: u32,
    pub m_ack: u32,
    pub init_window_segments: f64,
    pub ssthresh_segments: f64,
    pub transfer_bytes: u64,
}

impl ModelConfig {
    pub const DEFAULT_SEGMENT_BYTES: u32 = 536;
    pub const DEFAULT_INIT_WINDOW_BYTES: u64 = 536;
    pub const DEFAULT_SSTHRESH_BYTES: u64 = 65_535;
    pub const DEFAULT_M_ACK: u32 = 2;
    pub const DEFAULT_TRANSFER_BYTES: u64 = 65_535;

    /// Builds a config from byte-valued windows. Both windows are rounded
    /// down to whole segments; the initial window is at least one segment.
    pub fn from_byte_windows(
        segment_size_bytes: u32,
        m_ack: u32,
        init_window_bytes: u64,
        ssthresh_bytes: u64,
        transfer_bytes: u64,
    ) -> Self {
        let s = u64::from(segment_size_bytes.max(1));
        let init = whole_segments_in(init_window_bytes, s).max(1) as f64;
        let ssthresh = whole_segments_in(ssthresh_bytes, s) as f64;
        Self {
            segment_size_bytes,
            m_ack,
            init_window_segments: init,
            ssthresh_segments: ssthresh,
            transfer_bytes,
        }
    }

    pub fn with_transfer_bytes(mut self, transfer_bytes: u64) -> Self {
        self.transfer_bytes = transfer_bytes;
        self
    }

    pub fn segment_bits(&self) -> f64 {
        units::bytes_to_bits(f64::from(self.segment_size_bytes))
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.segment_size_bytes == 0 {
            return Err(ValidationError::SegmentSize);
        }
        if self.m_ack == 0 {
            return Err(ValidationError::MAck);
        }
        if !(self.init_window_segments >= 1.0 && self.init_window_segments.is_finite()) {
            return Err(ValidationError::InitWindow(self.init_window_segments));
        }
        if !(self.ssthresh_segments >= self.init_window_segments
            && self.ssthresh_segments.is_finite())
        {
            return Err(ValidationError::Ssthresh {
                ssthresh: self.ssthresh_segments,
                init: self.init_window_segments,
            });
        }
        if self.transfer_bytes == 0 {
            return Err(ValidationError::TransferBytes);
        }
        Ok(())
    }
}

impl Default for ModelConfig {
    /// s = 536 B, m_ack = 2, initial window 536 B (1 segment), ssthresh
    /// 65535 B (122 segments), transfer 65535 B.
    fn default() -> Self {
        Self::from_byte_windows(
            Self::DEFAULT_SEGMENT_BYTES,
            Self::DEFAULT_M_ACK,
            Self::DEFAULT_INIT_WINDOW_BYTES,
            Self::DEFAULT_SSTHRESH_BYTES,
            Self::DEFAULT_TRANSFER_BYTES,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub paths: PathSet,
    pub config: ModelConfig,
    pub label: String,
}

impl Scenario {
    pub fn new(paths: PathSet, config: ModelConfig, label: impl Into<String>) -> Self {
        Self {
            paths,
            config,
            label: label.into(),
        }
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        self.paths.validate()?;
        self.config.validate()
    }

    /// Parses the `key = value` scenario format.
    ///
    /// Link keys (`link.<i>.bandwidth_mbps`, `link.<i>.delay_ms`) are
    /// required for i = 1..n with no gaps. Transport keys fall back to
    /// [`ModelConfig::default`]. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut bw: Vec<Option<f64>> = Vec::new();
        let mut delay: Vec<Option<f64>> = Vec::new();
        let mut segment_size = u64::from(ModelConfig::DEFAULT_SEGMENT_BYTES);
        let mut m_ack = u64::from(ModelConfig::DEFAULT_M_ACK);
        let mut init_bytes = ModelConfig::DEFAULT_INIT_WINDOW_BYTES;
        let mut ssthresh_bytes = ModelConfig::DEFAULT_SSTHRESH_BYTES;
        let mut transfer = ModelConfig::DEFAULT_TRANSFER_BYTES;
        let mut label = String::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| ParseError::Syntax {
                    line: line_no,
                    text: raw.to_string(),
                })?;
            let bad = || ParseError::Value {
                line: line_no,
                key: key.to_string(),
                value: value.to_string(),
            };
            if let Some(rest) = key.strip_prefix("link.") {
                let (index, field) =
                    rest.split_once('.').ok_or_else(|| ParseError::UnknownKey {
                        line: line_no,
                        key: key.to_string(),
                    })?;
                let index: usize = index.parse().ok().filter(|&i| i >= 1).ok_or_else(|| {
                    ParseError::UnknownKey {
                        line: line_no,
                        key: key.to_string(),
                    }
                })?;
                let v: f64 = value.parse().map_err(|_| bad())?;
                let slot = match field {
                    "bandwidth_mbps" => &mut bw,
                    "delay_ms" => &mut delay,
                    _ => {
                        return Err(ParseError::UnknownKey {
                            line: line_no,
                            key: key.to_string(),
                        })
                    }
                };
                if slot.len() < index {
                    slot.resize(index, None);
                }
                slot[index - 1] = Some(v);
                continue;
            }
            match key {
                "segment_size_bytes" => segment_size = value.parse().map_err(|_| bad())?,
                "m_ack" => m_ack = value.parse().map_err(|_| bad())?,
                "init_window_bytes" => init_bytes = value.parse().map_err(|_| bad())?,
                "ssthresh_bytes" => ssthresh_bytes = value.parse().map_err(|_| bad())?,
                "transfer_bytes" => transfer = value.parse().map_err(|_| bad())?,
                "label" => label = value.to_string(),
                _ => {
                    return Err(ParseError::UnknownKey {
                        line: line_no,
                        key: key.to_string(),
                    })
                }
            }
        }

        let n = bw.len().max(delay.len());
        let mut links = Vec::with_capacity(n);
        for i in 0..n {
            let b = bw
                .get(i)
                .copied()
                .flatten()
                .ok_or(ParseError::MissingKey(format!(
                    "link.{}.bandwidth_mbps",
                    i + 1
                )))?;
            let d = delay
                .get(i)
                .copied()
                .flatten()
                .ok_or(ParseError::MissingKey(format!("link.{}.delay_ms", i + 1)))?;
            links.push(Link::from_mbps_ms(b, d));
        }
        let config = ModelConfig::from_byte_windows(
            u32::try_from(segment_size).unwrap_or(u32::MAX),
            u32::try_from(m_ack).unwrap_or(u32::MAX),
            init_bytes,
            ssthresh_bytes,
            transfer,
        );
        Ok(Self::new(PathSet::new(links), config, label))
    }

    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(Self::parse(&text)?)
    }
}

impl fmt::Display for Scenario {
    /// Writes the `key = value` format accepted by [`Scenario::parse`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.label.is_empty() {
            writeln!(f, "label = {}", self.label)?;
        }
        for (i, l) in self.paths.links().iter().enumerate() {
            writeln!(
                f,
                "link.{}.bandwidth_mbps = {}",
                i + 1,
                units::bps_to_mbps(l.bandwidth_bps)
            )?;
            writeln!(
                f,
                "link.{}.delay_ms = {}",
                i + 1,
                units::s_to_ms(l.prop_delay_s)
            )?;
        }
        let c = &self.config;
        let s = f64::from(c.segment_size_bytes);
        writeln!(f, "segment_size_bytes = {}", c.segment_size_bytes)?;
        writeln!(f, "m_ack = {}", c.m_ack)?;
        writeln!(
            f,
            "init_window_bytes = {}",
            (c.init_window_segments * s) as u64
        )?;
        writeln!(f, "ssthresh_bytes = {}", (c.ssthresh_segments * s) as u64)?;
        writeln!(f, "transfer_bytes = {}", c.transfer_bytes)
    }
}

/// Checks every invariant and hands the scenario back unchanged.
pub fn validate_scenario(scenario: Scenario) -> Result<Scenario, ValidationError> {
    scenario.validate()?;
    Ok(scenario)
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: invalid value {value:?} for `{key}`")]
    Value {
        line: usize,
        key: String,
        value: String,
    },
    #[error("missing key `{0}`")]
    MissingKey(String),
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Measured delays for one link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkDelays {
    pub label: String,
    pub delays_s: Vec<f64>,
}

/// Per-link measured delay samples, in first-appearance order of the
/// link labels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DelayDataset {
    links: Vec<LinkDelays>,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("expected header `link,delay_ms`, found {0:?}")]
    Header(String),
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("dataset contains no measurements")]
    Empty,
    #[error("link {label}: delay must be positive (got {value})")]
    NonPositive { label: String, value: f64 },
}

impl DelayDataset {
    pub fn new(links: Vec<LinkDelays>) -> Result<Self, DatasetError> {
        if links.is_empty() || links.iter().any(|l| l.delays_s.is_empty()) {
            return Err(DatasetError::Empty);
        }
        for l in &links {
            if let Some(&bad) = l.delays_s.iter().find(|&&d| !(d > 0.0 && d.is_finite())) {
                return Err(DatasetError::NonPositive {
                    label: l.label.clone(),
                    value: bad,
                });
            }
        }
        Ok(Self { links })
    }

    /// Appends a sample, creating the link entry on first sight.
    fn push(&mut self, label: &str, delay_s: f64) {
        match self.links.iter_mut().find(|l| l.label == label) {
            Some(l) => l.delays_s.push(delay_s),
            None => self.links.push(LinkDelays {
                label: label.to_string(),
                delays_s: vec![delay_s],
            }),
        }
    }

    pub fn links(&self) -> &[LinkDelays] {
        &self.links
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn get(&self, label: &str) -> Option<&[f64]> {
        self.links
            .iter()
            .find(|l| l.label == label)
            .map(|l| l.delays_s.as_slice())
    }

    /// Reads the `link,delay_ms` CSV format.
    pub fn from_reader<R: std::io::Read>(reader: R) -> Result<Self, DatasetError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let headers = rdr.headers().map_err(|e| DatasetError::Row {
            line: 1,
            message: e.to_string(),
        })?;
        if headers.len() != 2 || &headers[0] != "link" || &headers[1] != "delay_ms" {
            return Err(DatasetError::Header(
                headers.iter().collect::<Vec<_>>().join(","),
            ));
        }
        let mut ds = DelayDataset::default();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| DatasetError::Row {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.len() != 2 {
                return Err(DatasetError::Row {
                    line,
                    message: format!("expected 2 fields, found {}", rec.len()),
                });
            }
            let label = &rec[0];
            if label.is_empty() {
                return Err(DatasetError::Row {
                    line,
                    message: "empty link label".into(),
                });
            }
            let ms: f64 = rec[1].parse().map_err(|_| DatasetError::Row {
                line,
                message: format!("invalid delay {:?}", &rec[1]),
            })?;
            ds.push(label, units::ms_to_s(ms));
        }
        Self::new(ds.links)
    }

    pub fn load(path: &Path) -> Result<Self, DatasetError> {
        let file = std::fs::File::open(path).map_err(|source| DatasetError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_reader(std::io::BufReader::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_links() -> Scenario {
        Scenario::new(
            PathSet::new(vec![
                Link::from_mbps_ms(1.0, 10.0),
                Link::from_mbps_ms(2.0, 20.0),
            ]),
            ModelConfig::default(),
            "two",
        )
    }

    #[test]
    fn valid_scenario_passes_unchanged() {
        let s = two_links();
        assert_eq!(validate_scenario(s.clone()).unwrap(), s);
    }

    #[test]
    fn zero_bandwidth_rejected() {
        let mut s = two_links();
        s.paths = PathSet::new(vec![Link::new(0.0, 0.01)]);
        let err = validate_scenario(s).unwrap_err();
        assert!(err.to_string().contains("bandwidth must be positive"));
        assert_eq!(err.field(), "link.1.bandwidth_mbps");
    }

    #[test]
    fn zero_m_ack_rejected() {
        let mut s = two_links();
        s.config.m_ack = 0;
        let err = validate_scenario(s).unwrap_err();
        assert!(err.to_string().contains("m_ack must be ≥ 1"));
    }

    #[test]
    fn other_invariants() {
        let mut s = two_links();
        s.paths = PathSet::new(vec![]);
        assert_eq!(s.validate(), Err(ValidationError::NoLinks));

        let mut s = two_links();
        s.paths = PathSet::new(vec![Link::new(1e6, -0.001)]);
        assert!(matches!(
            s.validate(),
            Err(ValidationError::Delay { link: 1, .. })
        ));

        let mut s = two_links();
        s.config.ssthresh_segments = 0.5;
        assert!(matches!(
            s.validate(),
            Err(ValidationError::InitWindow(_)) | Err(ValidationError::Ssthresh { .. })
        ));

        let mut s = two_links();
        s.config.transfer_bytes = 0;
        assert_eq!(s.validate(), Err(ValidationError::TransferBytes));

        let mut s = two_links();
        s.paths = PathSet::new(vec![Link::new(f64::NAN, 0.0)]);
        assert!(s.validate().is_err());
    }

    #[test]
    fn validation_is_idempotent() {
        let s = two_links();
        let once = validate_scenario(s).unwrap();
        let twice = validate_scenario(once.clone()).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn segment_conversions() {
        assert_eq!(segments_for_bytes(536, 536), 1);
        assert_eq!(segments_for_bytes(65_535, 536), 123);
        assert_eq!(whole_segments_in(65_535, 536), 122);
        assert_eq!(segments_for_bytes(0, 536), 0);
    }

    #[test]
    fn default_config_windows_in_segments() {
        let c = ModelConfig::default();
        assert_eq!(c.init_window_segments, 1.0);
        assert_eq!(c.ssthresh_segments, 122.0);
        assert_eq!(c.m_ack, 2);
        assert_eq!(c.segment_bits(), 4288.0);
    }

    #[test]
    fn parse_scenario_file() {
        let text = "\
# two links
label = demo
link.1.bandwidth_mbps = 1
link.1.delay_ms = 10
link.2.bandwidth_mbps = 2.5
link.2.delay_ms = 20
m_ack = 3
transfer_bytes = 10000
";
        let s = Scenario::parse(text).unwrap();
        assert_eq!(s.label, "demo");
        assert_eq!(s.paths.len(), 2);
        assert_eq!(s.paths.link(2).bandwidth_bps, 2.5e6);
        assert!((s.paths.link(2).prop_delay_s - 0.02).abs() < 1e-15);
        assert_eq!(s.config.m_ack, 3);
        assert_eq!(s.config.transfer_bytes, 10_000);
        assert_eq!(s.config.ssthresh_segments, 122.0);

        let again = Scenario::parse(&s.to_string()).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn parse_errors_name_the_problem() {
        assert!(matches!(
            Scenario::parse("link.1.bandwidth_mbps = 1\n"),
            Err(ParseError::MissingKey(k)) if k == "link.1.delay_ms"
        ));
        assert!(matches!(
            Scenario::parse("bogus = 1\n"),
            Err(ParseError::UnknownKey { line: 1, .. })
        ));
        assert!(matches!(
            Scenario::parse("m_ack = two\n"),
            Err(ParseError::Value { line: 1, .. })
        ));
        assert!(matches!(
            Scenario::parse("just text\n"),
            Err(ParseError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            Scenario::parse("link.2.delay_ms = 1\nlink.2.bandwidth_mbps = 1\n"),
            Err(ParseError::MissingKey(_))
        ));
    }

    #[test]
    fn dataset_parses() {
        let ds = DelayDataset::from_reader("link,delay_ms\nA,10\nA,20\n".as_bytes()).unwrap();
        assert_eq!(ds.link_count(), 1);
        let a = ds.get("A").unwrap();
        assert!((a[0] - 0.010).abs() < 1e-15 && (a[1] - 0.020).abs() < 1e-15);
    }

    #[test]
    fn dataset_keeps_label_order() {
        let ds = DelayDataset::from_reader("link,delay_ms\nB,1\nA,2\nB,3\n".as_bytes()).unwrap();
        let labels: Vec<_> = ds.links().iter().map(|l| l.label.as_str()).collect();
        assert_eq!(labels, ["B", "A"]);
    }

    #[test]
    fn dataset_errors() {
        let err = DelayDataset::from_reader("link,delay_ms\nA,10\nA,abc\n".as_bytes()).unwrap_err();
        assert!(matches!(err, DatasetError::Row { line: 3, .. }), "{err}");
        assert!(matches!(
            DelayDataset::from_reader("A,10\nA,20\n".as_bytes()),
            Err(DatasetError::Header(_))
        ));
        assert!(matches!(
            DelayDataset::from_reader("link,delay_ms\n".as_bytes()),
            Err(DatasetError::Empty)
        ));
        assert!(matches!(
            DelayDataset::from_reader("link,delay_ms\nA,-1\n".as_bytes()),
            Err(DatasetError::NonPositive { .. })
        ));
    }
}
