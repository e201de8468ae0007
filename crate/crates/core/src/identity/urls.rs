//! Registrable-domain extraction and link canonicalization.

use std::collections::BTreeSet;
use std::net::IpAddr;

use url::Url;

use crate::catalog::Skill;

/// Shared hosting and storage providers whose domains say nothing about a
/// skill's developer.
pub const CLOUD_HOSTING_DOMAINS: &[&str] = &[
    "amazonaws.com",
    "cloudfront.net",
    "azurewebsites.net",
    "windows.net",
    "azureedge.net",
    "appspot.com",
    "googleapis.com",
    "googleusercontent.com",
    "firebaseapp.com",
    "web.app",
    "herokuapp.com",
    "github.io",
    "githubusercontent.com",
    "gitlab.io",
    "netlify.app",
    "vercel.app",
    "wixsite.com",
    "weebly.com",
    "wordpress.com",
    "blogspot.com",
    "sites.google.com",
    "docs.google.com",
    "dropbox.com",
    "glitch.me",
    "pages.dev",
];

/// Query parameters that never identify a resource.
fn is_tracking_param(key: &str) -> bool {
    key.starts_with("utm_") || key == "ref" || key == "tag"
}

/// Registrable root of a host name (`help.fitbit.com` → `fitbit.com`).
/// IP literals and bare public suffixes have none.
pub fn root_domain(host: &str) -> Option<String> {
    let host = host.trim_end_matches('.').to_ascii_lowercase();
    if host.is_empty() || host.parse::<IpAddr>().is_ok() {
        return None;
    }
    psl::domain_str(&host).map(str::to_string)
}

pub fn url_host(url: &str) -> Option<String> {
    Url::parse(url).ok()?.host_str().map(|h| h.to_ascii_lowercase())
}

pub fn url_root_domain(url: &str) -> Option<String> {
    root_domain(&url_host(url)?)
}

/// Canonical form used for link matching: lowercase scheme and host, no
/// fragment, no `utm_*`/`ref`/`tag` parameters, no trailing slash.
pub fn canonicalize_url(raw: &str) -> Option<String> {
    canonicalize_parsed(&Url::parse(raw.trim()).ok()?)
}

pub(crate) fn canonicalize_parsed(url: &Url) -> Option<String> {
    let host = url.host_str()?;
    let mut out = format!("{}://{}", url.scheme(), host.to_ascii_lowercase());
    if let Some(port) = url.port() {
        out.push_str(&format!(":{port}"));
    }
    out.push_str(url.path().trim_end_matches('/'));
    if let Some(q) = url.query() {
        let kept: Vec<&str> = q
            .split('&')
            .filter(|kv| !kv.is_empty())
            .filter(|kv| !is_tracking_param(kv.split('=').next().unwrap_or_default()))
            .collect();
        if !kept.is_empty() {
            out.push('?');
            out.push_str(&kept.join("&"));
        }
    }
    Some(out)
}

#[derive(Debug, Clone)]
pub struct DomainPolicy {
    denylist: BTreeSet<String>,
}

impl Default for DomainPolicy {
    fn default() -> Self {
        DomainPolicy {
            denylist: CLOUD_HOSTING_DOMAINS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl DomainPolicy {
    pub fn with_denylist(domains: impl IntoIterator<Item = String>) -> Self {
        DomainPolicy {
            denylist: domains.into_iter().map(|d| d.to_ascii_lowercase()).collect(),
        }
    }

    pub fn is_denied(&self, host: &str) -> bool {
        self.denylist
            .iter()
            .any(|d| host == d || host.ends_with(&format!(".{d}")))
    }

    /// Root domains of the skill's metadata URLs, sorted and de-duplicated.
    pub fn extract_domains(&self, skill: &Skill) -> Vec<String> {
        let mut out = BTreeSet::new();
        for raw in &skill.metadata_urls {
            let Some(host) = url_host(raw) else {
                log::warn!("skill {}: skipping unparseable URL {raw:?}", skill.id);
                continue;
            };
            if self.is_denied(&host) {
                continue;
            }
            match root_domain(&host) {
                Some(root) if !self.is_denied(&root) => {
                    out.insert(root);
                }
                Some(_) => {}
                None => log::warn!("skill {}: no registrable domain in {raw:?}", skill.id),
            }
        }
        out.into_iter().collect()
    }
}

pub fn extract_domains(skill: &Skill) -> Vec<String> {
    DomainPolicy::default().extract_domains(skill)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn skill_with(urls: &[&str]) -> Skill {
        Skill {
            id: "s".into(),
            name: "s".into(),
            invocation: "s".into(),
            phonemes: vec![],
            amazon_url: String::new(),
            metadata_urls: urls.iter().map(|s| s.to_string()).collect(),
            reviews: 0,
            account_linking: true,
            pronunciation_override: None,
        }
    }

    #[test]
    fn shared_root_collapses() {
        let s = skill_with(&["https://www.fitbit.com/privacy", "https://help.fitbit.com/x"]);
        assert_eq!(extract_domains(&s), vec!["fitbit.com"]);
    }

    #[test]
    fn no_urls() {
        assert!(extract_domains(&skill_with(&[])).is_empty());
    }

    #[test]
    fn cloud_hosting_excluded() {
        let s = skill_with(&[
            "https://s3.amazonaws.com/skill-assets/p.html",
            "https://bucket.s3.us-east-1.amazonaws.com/policy",
            "https://myskill.herokuapp.com/oauth",
        ]);
        assert!(extract_domains(&s).is_empty());
    }

    #[test]
    fn multi_label_suffixes_and_bad_urls() {
        let s = skill_with(&["https://shop.example.co.uk/a", "not a url", "http://10.0.0.1/x"]);
        assert_eq!(extract_domains(&s), vec!["example.co.uk"]);
    }

    #[test]
    fn custom_denylist() {
        let p = DomainPolicy::with_denylist(["fitbit.com".to_string()]);
        let s = skill_with(&["https://www.fitbit.com/privacy", "https://Example.ORG"]);
        assert_eq!(p.extract_domains(&s), vec!["example.org"]);
    }

    #[test]
    fn canonicalization_rules() {
        assert_eq!(
            canonicalize_url("HTTPS://WWW.Amazon.com/dp/B01D/?utm_source=x&ref=sr_1&tag=aff-20#reviews").as_deref(),
            Some("https://www.amazon.com/dp/B01D")
        );
        assert_eq!(
            canonicalize_url("https://www.amazon.com/dp/B01D?th=1&utm_medium=y").as_deref(),
            Some("https://www.amazon.com/dp/B01D?th=1")
        );
        assert_eq!(
            canonicalize_url("https://example.com/").as_deref(),
            Some("https://example.com")
        );
        assert_eq!(canonicalize_url("mailto:someone@example.com"), None);
    }
}
