//! Backlink-based skill identity and the mapper table.

mod backlink;
mod corpus;
mod mapper;
mod urls;

pub use backlink::{extract_links, find_backlink, resolve_identity, Identity};
pub use corpus::{normalize_fingerprint, Corpus, ManifestEntry, PageRecord, PageSource};
pub use mapper::{
    apply_delta, assemble_table, build_mapper_table, build_mapper_table_with_graph, diff_tables,
    resolve_identities, Delta, MapperEntry, MapperTable, Neighbor,
};
pub use urls::{
    canonicalize_url, extract_domains, root_domain, url_host, url_root_domain, DomainPolicy,
    CLOUD_HOSTING_DOMAINS,
};
