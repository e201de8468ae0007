use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::urls::url_root_domain;
use crate::error::{Error, Result};

/// A crawled page standing in for a search result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageRecord {
    pub url: String,
    pub domain: String,
    pub body: String,
    pub user_generated: bool,
    pub cert_sha256: String,
}

impl PageRecord {
    pub fn new(
        url: impl Into<String>,
        body: impl Into<String>,
        user_generated: bool,
        cert_sha256: &str,
    ) -> Result<Self> {
        let url = url.into();
        let domain = url_root_domain(&url)
            .ok_or_else(|| Error::invalid(format!("no registrable domain for page {url}")))?;
        Ok(PageRecord {
            url,
            domain,
            body: body.into(),
            user_generated,
            cert_sha256: normalize_fingerprint(cert_sha256)?,
        })
    }
}

/// Lowercase hex without separators (`AB:CD` → `abcd`).
pub fn normalize_fingerprint(raw: &str) -> Result<String> {
    let hex: String = raw
        .chars()
        .filter(|c| *c != ':')
        .map(|c| c.to_ascii_lowercase())
        .collect();
    if hex.is_empty() || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(Error::invalid(format!("bad certificate fingerprint {raw:?}")));
    }
    Ok(hex)
}

/// Where backlink search gets pages from. The default implementation is the
/// local [`Corpus`]; a live crawler would implement this too.
pub trait PageSource {
    /// All known pages on `domain`.
    fn pages_for_domain(&self, domain: &str) -> Vec<PageRecord>;
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub url: String,
    pub domain: String,
    pub path: String,
    pub user_generated: bool,
    pub cert_sha256: String,
}

#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pages: Vec<PageRecord>,
    by_domain: BTreeMap<String, Vec<usize>>,
}

impl Corpus {
    pub fn new(pages: Vec<PageRecord>) -> Result<Self> {
        let mut by_domain: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, p) in pages.iter().enumerate() {
            match url_root_domain(&p.url) {
                Some(d) if d == p.domain => {}
                other => {
                    return Err(Error::invalid(format!(
                        "page {} declares domain {} but its root is {:?}",
                        p.url, p.domain, other
                    )))
                }
            }
            by_domain.entry(p.domain.clone()).or_default().push(i);
        }
        Ok(Corpus { pages, by_domain })
    }

    /// Reads a manifest; page bodies are resolved relative to its directory.
    pub fn load_manifest(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let entries: Vec<ManifestEntry> = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let mut pages = Vec::with_capacity(entries.len());
        for e in entries {
            let body_path = base.join(&e.path);
            let body = std::fs::read_to_string(&body_path).map_err(|err| Error::io(&body_path, err))?;
            pages.push(PageRecord {
                url: e.url,
                domain: e.domain.to_ascii_lowercase(),
                body,
                user_generated: e.user_generated,
                cert_sha256: normalize_fingerprint(&e.cert_sha256)?,
            });
        }
        Corpus::new(pages)
    }

    pub fn pages(&self) -> &[PageRecord] {
        &self.pages
    }

    pub fn len(&self) -> usize {
        self.pages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pages.is_empty()
    }

    /// Certificate per domain, taken from the first listed page.
    pub fn domain_certs(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        for (domain, idx) in &self.by_domain {
            let cert = &self.pages[idx[0]].cert_sha256;
            if idx.iter().any(|&i| &self.pages[i].cert_sha256 != cert) {
                log::warn!("domain {domain} is served with more than one certificate");
            }
            out.insert(domain.clone(), cert.clone());
        }
        out
    }
}

impl PageSource for Corpus {
    fn pages_for_domain(&self, domain: &str) -> Vec<PageRecord> {
        self.by_domain
            .get(domain)
            .map(|idx| idx.iter().map(|&i| self.pages[i].clone()).collect())
            .unwrap_or_default()
    }
}
