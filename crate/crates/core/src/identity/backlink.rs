use std::collections::BTreeSet;

use scraper::{Html, Selector};
use url::Url;

use super::corpus::{PageRecord, PageSource};
use super::urls::{canonicalize_parsed, canonicalize_url, DomainPolicy};
use crate::catalog::Skill;

/// A verified developer identity for a skill.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Identity {
    pub domain: String,
    pub cert_sha256: String,
    pub page_url: String,
}

/// Canonical targets of every `<a href>` / `<area href>` on the page.
/// Relative links resolve against the page URL. Plain-text URLs don't count.
pub fn extract_links(page_url: &str, body: &str) -> BTreeSet<String> {
    let base = Url::parse(page_url).ok();
    let doc = Html::parse_document(body);
    let selector = Selector::parse("a[href], area[href]").expect("static selector");
    doc.select(&selector)
        .filter_map(|el| el.value().attr("href"))
        .filter_map(|href| {
            let resolved = match &base {
                Some(b) => b.join(href.trim()).ok()?,
                None => Url::parse(href.trim()).ok()?,
            };
            canonicalize_parsed(&resolved)
        })
        .collect()
}

/// Searches the skill's own domains for a page linking to its marketplace
/// listing. Pages are tried by domain, then URL; user-generated pages never
/// count.
pub fn find_backlink(skill: &Skill, pages: &[PageRecord], policy: &DomainPolicy) -> Option<Identity> {
    let target = canonicalize_url(&skill.amazon_url)?;
    let domains: BTreeSet<String> = policy.extract_domains(skill).into_iter().collect();
    let mut candidates: Vec<&PageRecord> = pages
        .iter()
        .filter(|p| !p.user_generated && domains.contains(&p.domain))
        .collect();
    candidates.sort_by(|a, b| (&a.domain, &a.url).cmp(&(&b.domain, &b.url)));
    candidates
        .into_iter()
        .find(|p| extract_links(&p.url, &p.body).contains(&target))
        .map(|p| Identity {
            domain: p.domain.clone(),
            cert_sha256: p.cert_sha256.clone(),
            page_url: p.url.clone(),
        })
}

/// Fetches the pages for each of the skill's domains and runs [`find_backlink`].
pub fn resolve_identity(skill: &Skill, source: &dyn PageSource, policy: &DomainPolicy) -> Option<Identity> {
    let pages: Vec<PageRecord> = policy
        .extract_domains(skill)
        .iter()
        .flat_map(|d| source.pages_for_domain(d))
        .collect();
    find_backlink(skill, &pages, policy)
}
