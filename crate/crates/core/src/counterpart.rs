//! Counterpart activity: browsing history and installed apps.
//!
//! A domain only counts as evidence of real use when it shows up in at
//! least two valid sessions, where a valid session touches at least three
//! distinct pages and none of its visits falls shortly after a visit to a
//! skill marketplace page. Lures planted by an attacker (one-off visits,
//! or visits right after a skill page) do not pass.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use url::Url;

use crate::error::{Error, Result};
use crate::identity::{canonicalize_url, normalize_fingerprint, root_domain, MapperTable};

pub const MINUTE_MS: u64 = 60_000;
pub const DEFAULT_SESSION_GAP_MS: u64 = 30 * MINUTE_MS;
pub const DEFAULT_PRECEDE_WINDOW_MS: u64 = 5 * MINUTE_MS;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub timestamp: u64,
    pub url: String,
    pub domain: String,
    pub is_skill_page: bool,
}

/// Which URLs are skill marketplace listings.
#[derive(Debug, Clone)]
pub struct SkillPageRules {
    hosts: BTreeSet<String>,
}

impl Default for SkillPageRules {
    fn default() -> Self {
        SkillPageRules::with_hosts(["amazon.com", "www.amazon.com", "alexa.amazon.com"])
    }
}

fn is_asin(s: &str) -> bool {
    s.len() == 10 && s.bytes().all(|b| b.is_ascii_alphanumeric())
}

fn has_listing_id<'a>(mut segments: impl Iterator<Item = &'a str>) -> bool {
    while let Some(seg) = segments.next() {
        if matches!(seg, "dp" | "product") && segments.next().is_some_and(is_asin) {
            return true;
        }
    }
    false
}

impl SkillPageRules {
    pub fn with_hosts<S: Into<String>>(hosts: impl IntoIterator<Item = S>) -> Self {
        SkillPageRules {
            hosts: hosts.into_iter().map(|h| h.into().to_ascii_lowercase()).collect(),
        }
    }

    /// Listing pages look like `/…/dp/<ASIN>` or `/gp/product/<ASIN>`; the
    /// Alexa web app keeps the route in the fragment (`#skills/dp/<ASIN>`).
    pub fn is_skill_page(&self, url: &str) -> bool {
        let Ok(u) = Url::parse(url) else {
            return false;
        };
        let Some(host) = u.host_str() else {
            return false;
        };
        if !self.hosts.contains(&host.to_ascii_lowercase()) {
            return false;
        }
        has_listing_id(u.path().split('/').filter(|s| !s.is_empty()))
            || u
                .fragment()
                .is_some_and(|f| has_listing_id(f.split('/').filter(|s| !s.is_empty())))
    }
}

impl HistoryRecord {
    /// Derives the domain and skill-page flag. `None` for URLs without a host.
    pub fn new(timestamp: u64, url: &str, rules: &SkillPageRules) -> Option<Self> {
        let host = Url::parse(url).ok()?.host_str()?.to_ascii_lowercase();
        let domain = root_domain(&host).unwrap_or(host);
        Some(HistoryRecord {
            timestamp,
            url: url.to_string(),
            domain,
            is_skill_page: rules.is_skill_page(url),
        })
    }

    fn page_key(&self) -> String {
        canonicalize_url(&self.url).unwrap_or_else(|| self.url.clone())
    }
}

#[derive(Debug, Deserialize)]
struct HistoryRow {
    timestamp_ms: u64,
    url: String,
}

/// Reads `timestamp_ms,url` CSV. Rows with a zero timestamp or an
/// unparseable URL are skipped with a warning.
pub fn read_history_csv(reader: impl std::io::Read, rules: &SkillPageRules) -> Result<Vec<HistoryRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let row: HistoryRow = row?;
        if row.timestamp_ms == 0 {
            log::warn!("skipping history row with zero timestamp: {}", row.url);
            continue;
        }
        match HistoryRecord::new(row.timestamp_ms, &row.url, rules) {
            Some(r) => out.push(r),
            None => log::warn!("skipping unparseable history URL {:?}", row.url),
        }
    }
    Ok(out)
}

pub fn load_history(path: impl AsRef<Path>, rules: &SkillPageRules) -> Result<Vec<HistoryRecord>> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_history_csv(f, rules)
}

pub fn write_history_csv(records: &[HistoryRecord]) -> String {
    let mut out = String::from("timestamp_ms,url\n");
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for r in records {
        w.write_record([r.timestamp.to_string(), r.url.clone()])
            .expect("in-memory CSV write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf8"));
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Session {
    pub domain: String,
    pub visits: Vec<HistoryRecord>,
    pub distinct_pages: usize,
}

impl Session {
    fn new(domain: String, visits: Vec<HistoryRecord>) -> Self {
        let distinct_pages = visits
            .iter()
            .map(HistoryRecord::page_key)
            .collect::<BTreeSet<_>>()
            .len();
        Session {
            domain,
            visits,
            distinct_pages,
        }
    }
}

/// Groups visits per domain; a gap of more than `gap_ms` between two visits
/// to the same domain starts a new session. Exact duplicate records are
/// collapsed. Output is ordered by domain, then start time.
pub fn segment_sessions(history: &[HistoryRecord], gap_ms: u64) -> Vec<Session> {
    let mut sorted: Vec<&HistoryRecord> = history.iter().collect();
    sorted.sort_by(|a, b| (a.timestamp, &a.url).cmp(&(b.timestamp, &b.url)));
    sorted.dedup_by(|a, b| a.timestamp == b.timestamp && a.url == b.url);

    let mut per_domain: BTreeMap<&str, Vec<&HistoryRecord>> = BTreeMap::new();
    for r in sorted {
        per_domain.entry(r.domain.as_str()).or_default().push(r);
    }

    let mut sessions = Vec::new();
    for (domain, visits) in per_domain {
        let mut current: Vec<HistoryRecord> = Vec::new();
        for v in visits {
            if let Some(last) = current.last() {
                if v.timestamp - last.timestamp > gap_ms {
                    sessions.push(Session::new(domain.to_string(), std::mem::take(&mut current)));
                }
            }
            current.push(v.clone());
        }
        if !current.is_empty() {
            sessions.push(Session::new(domain.to_string(), current));
        }
    }
    sessions
}

/// Thresholds of the poisoning-resistant history filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HistoryFilter {
    pub session_gap_ms: u64,
    pub precede_window_ms: u64,
    pub min_sessions: usize,
    pub min_distinct_pages: usize,
}

impl Default for HistoryFilter {
    fn default() -> Self {
        HistoryFilter {
            session_gap_ms: DEFAULT_SESSION_GAP_MS,
            precede_window_ms: DEFAULT_PRECEDE_WINDOW_MS,
            min_sessions: 2,
            min_distinct_pages: 3,
        }
    }
}

impl HistoryFilter {
    pub fn qualified_domains(&self, history: &[HistoryRecord]) -> BTreeSet<String> {
        let sessions = segment_sessions(history, self.session_gap_ms);
        self.filter(&sessions, history)
    }

    pub fn filter(&self, sessions: &[Session], history: &[HistoryRecord]) -> BTreeSet<String> {
        let mut skill_times: Vec<u64> = history
            .iter()
            .filter(|r| r.is_skill_page)
            .map(|r| r.timestamp)
            .collect();
        skill_times.sort_unstable();
        let preceded = |ts: u64| {
            let idx = skill_times.partition_point(|&t| t <= ts);
            idx > 0 && ts - skill_times[idx - 1] <= self.precede_window_ms
        };

        let mut valid: BTreeMap<&str, usize> = BTreeMap::new();
        for s in sessions {
            let ok = s.distinct_pages >= self.min_distinct_pages
                && !s.visits.iter().any(|v| preceded(v.timestamp));
            if ok {
                *valid.entry(s.domain.as_str()).or_default() += 1;
            }
        }
        valid
            .into_iter()
            .filter(|&(_, n)| n >= self.min_sessions)
            .map(|(d, _)| d.to_string())
            .collect()
    }
}

/// Domains with at least two valid sessions (three or more distinct pages,
/// no visit within `precede_window_ms` after a skill-page visit).
pub fn filter_history(
    sessions: &[Session],
    history: &[HistoryRecord],
    precede_window_ms: u64,
) -> BTreeSet<String> {
    HistoryFilter {
        precede_window_ms,
        ..HistoryFilter::default()
    }
    .filter(sessions, history)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppRecord {
    pub package: String,
    pub cert_sha256: String,
}

pub fn parse_apps(text: &str) -> Result<Vec<AppRecord>> {
    let apps: Vec<AppRecord> = serde_json::from_str(text)?;
    apps.into_iter()
        .map(|a| {
            if a.package.trim().is_empty() {
                return Err(Error::invalid("app record with empty package"));
            }
            Ok(AppRecord {
                cert_sha256: normalize_fingerprint(&a.cert_sha256)?,
                package: a.package,
            })
        })
        .collect()
}

pub fn load_apps(path: impl AsRef<Path>) -> Result<Vec<AppRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_apps(&text)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub qualified_domains: BTreeSet<String>,
    pub app_certs: BTreeSet<String>,
}

impl Evidence {
    pub fn collect(history: &[HistoryRecord], apps: &[AppRecord], filter: &HistoryFilter) -> Self {
        Evidence {
            qualified_domains: filter.qualified_domains(history),
            app_certs: apps.iter().map(|a| a.cert_sha256.clone()).collect(),
        }
    }
}

/// Skills whose mapper-table certificate belongs to a qualified domain or an
/// installed app. Runs entirely on local data.
pub fn match_skills(
    evidence: &Evidence,
    table: &MapperTable,
    domain_certs: &BTreeMap<String, String>,
) -> BTreeSet<String> {
    let mut certs: BTreeSet<&str> = evidence.app_certs.iter().map(String::as_str).collect();
    for d in &evidence.qualified_domains {
        match domain_certs.get(d) {
            Some(c) => {
                certs.insert(c);
            }
            None => log::debug!("no certificate known for qualified domain {d}"),
        }
    }
    table
        .entries
        .iter()
        .filter(|e| certs.contains(e.cert_sha256.as_str()))
        .map(|e| e.skill_id.clone())
        .collect()
}
