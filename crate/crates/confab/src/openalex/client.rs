use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use confab_core::works::{ExternalWork, WorkSource};
use serde::Deserialize;

use super::cache::{FixtureCache, Request};
use super::OpenAlexError;

pub const DEFAULT_BASE_URL: &str = "https://api.openalex.org";
pub const DEFAULT_RATE_LIMIT: f64 = 5.0;
pub const MAILTO_ENV: &str = "OPENALEX_MAILTO";
const MAX_PER_PAGE: usize = 200;
const SELECT_FIELDS: &str = "id,display_name,publication_year,doi,cited_by_count,authorships,primary_location";

#[derive(Debug, Clone)]
pub struct ClientConfig {
    pub base_url: String,
    /// Never touch the network; cache misses are errors.
    pub offline: bool,
    /// Requests per second in live mode.
    pub rate_limit: f64,
    pub mailto: Option<String>,
    pub max_attempts: u32,
    pub backoff: Duration,
    pub timeout: Duration,
}

impl Default for ClientConfig {
    fn default() -> Self {
        ClientConfig {
            base_url: DEFAULT_BASE_URL.to_string(),
            offline: true,
            rate_limit: DEFAULT_RATE_LIMIT,
            mailto: None,
            max_attempts: 3,
            backoff: Duration::from_millis(500),
            timeout: Duration::from_secs(30),
        }
    }
}

impl ClientConfig {
    /// Fills `mailto` from the environment when not already set.
    pub fn with_env_mailto(mut self) -> Self {
        if self.mailto.is_none() {
            self.mailto = std::env::var(MAILTO_ENV).ok().filter(|s| !s.trim().is_empty());
        }
        self
    }
}

/// OpenAlex client backed by a fixture cache. In live mode cache misses are
/// fetched (rate limited, retried) and recorded.
pub struct OpenAlexClient {
    cache: FixtureCache,
    config: ClientConfig,
    agent: Option<ureq::Agent>,
    next_slot: Mutex<Option<Instant>>,
}

impl OpenAlexClient {
    pub fn new(cache: FixtureCache, config: ClientConfig) -> Self {
        let agent = (!config.offline).then(|| {
            ureq::Agent::config_builder()
                .timeout_global(Some(config.timeout))
                .http_status_as_error(false)
                .build()
                .into()
        });
        OpenAlexClient {
            cache,
            config,
            agent,
            next_slot: Mutex::new(None),
        }
    }

    pub fn offline(fixtures: impl Into<std::path::PathBuf>) -> Self {
        Self::new(FixtureCache::new(fixtures), ClientConfig::default())
    }

    pub fn cache(&self) -> &FixtureCache {
        &self.cache
    }

    pub fn config(&self) -> &ClientConfig {
        &self.config
    }

    pub fn works_search_request(title: &str, max_n: usize) -> Request {
        Request::new(
            "works",
            [
                ("search", title.trim().to_string()),
                ("per_page", max_n.min(MAX_PER_PAGE).to_string()),
                ("select", SELECT_FIELDS.to_string()),
            ],
        )
    }

    /// Phrase-quoted title-and-abstract search, one result per page; only `meta.count` is read.
    pub fn works_count_request(phrase: &str) -> Request {
        Request::new(
            "works",
            [
                ("filter", format!("title_and_abstract.search:\"{}\"", phrase.trim())),
                ("per_page", "1".to_string()),
                ("select", "id".to_string()),
            ],
        )
    }

    /// Response body for `req`, from the cache or (live mode) the service.
    pub fn fetch(&self, req: &Request) -> Result<String, OpenAlexError> {
        let cached = self.cache.get(req).map_err(|e| OpenAlexError::Cache {
            path: self.cache.path_for(&req.fingerprint()),
            reason: e.to_string(),
        })?;
        if let Some(entry) = cached {
            return Ok(entry.body);
        }
        let Some(agent) = &self.agent else {
            return Err(OpenAlexError::FixtureMiss {
                fingerprint: req.fingerprint(),
                request: req.describe(),
            });
        };
        let body = self.fetch_live(agent, req)?;
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        self.cache.put(req, &body, now).map_err(|e| OpenAlexError::Cache {
            path: self.cache.path_for(&req.fingerprint()),
            reason: e.to_string(),
        })?;
        Ok(body)
    }

    fn wait_for_slot(&self) {
        let interval = Duration::from_secs_f64(1.0 / self.config.rate_limit.max(1e-3));
        let mut slot = self.next_slot.lock().unwrap_or_else(|e| e.into_inner());
        let now = Instant::now();
        let at = slot.map_or(now, |t| t.max(now));
        *slot = Some(at + interval);
        drop(slot);
        if at > now {
            thread::sleep(at - now);
        }
    }

    fn fetch_live(&self, agent: &ureq::Agent, req: &Request) -> Result<String, OpenAlexError> {
        let url = format!("{}/{}", self.config.base_url.trim_end_matches('/'), req.endpoint);
        let mut last = None;
        for attempt in 0..self.config.max_attempts.max(1) {
            if attempt > 0 {
                thread::sleep(self.config.backoff * 2u32.pow(attempt - 1));
            }
            self.wait_for_slot();
            let mut call = agent.get(&url);
            for (k, v) in &req.params {
                call = call.query(k, v);
            }
            if let Some(m) = &self.config.mailto {
                call = call.header("User-Agent", &format!("confab (mailto:{m})"));
            }
            match call.call() {
                Ok(mut resp) => {
                    let status = resp.status().as_u16();
                    if status == 200 {
                        return resp
                            .body_mut()
                            .read_to_string()
                            .map_err(|e| OpenAlexError::Transport(e.to_string()));
                    }
                    let err = OpenAlexError::Http {
                        status,
                        request: req.describe(),
                    };
                    if status != 429 && status < 500 {
                        return Err(err);
                    }
                    last = Some(err);
                }
                Err(e) => last = Some(OpenAlexError::Transport(e.to_string())),
            }
        }
        Err(last.unwrap_or_else(|| OpenAlexError::Transport("no attempt made".into())))
    }

    pub fn topic_works_count(&self, phrase: &str) -> Result<u64, OpenAlexError> {
        if phrase.trim().is_empty() {
            return Err(OpenAlexError::Precondition("empty topic phrase".into()));
        }
        let req = Self::works_count_request(phrase);
        let body = self.fetch(&req)?;
        let parsed: CountBody = decode(&req, &body)?;
        Ok(parsed.meta.count)
    }

    pub fn search_candidates(&self, title: &str, max_n: usize) -> Result<Vec<ExternalWork>, OpenAlexError> {
        if title.trim().is_empty() {
            return Err(OpenAlexError::Precondition("empty title".into()));
        }
        if max_n == 0 {
            return Ok(Vec::new());
        }
        let req = Self::works_search_request(title, max_n);
        let body = self.fetch(&req)?;
        let parsed: SearchBody = decode(&req, &body)?;
        Ok(parsed
            .results
            .into_iter()
            .take(max_n)
            .filter_map(RawWork::into_work)
            .collect())
    }
}

impl WorkSource for OpenAlexClient {
    type Error = OpenAlexError;

    fn search_candidates(&self, title: &str, max_n: usize) -> Result<Vec<ExternalWork>, OpenAlexError> {
        OpenAlexClient::search_candidates(self, title, max_n)
    }
}

fn decode<T: for<'de> Deserialize<'de>>(req: &Request, body: &str) -> Result<T, OpenAlexError> {
    serde_json::from_str(body).map_err(|e| OpenAlexError::Decode {
        fingerprint: req.fingerprint(),
        reason: e.to_string(),
    })
}

#[derive(Deserialize)]
struct CountBody {
    meta: Meta,
}

#[derive(Deserialize)]
struct Meta {
    count: u64,
}

#[derive(Deserialize)]
struct SearchBody {
    #[serde(default)]
    results: Vec<RawWork>,
}

#[derive(Deserialize)]
struct RawWork {
    id: Option<String>,
    display_name: Option<String>,
    title: Option<String>,
    publication_year: Option<i32>,
    doi: Option<String>,
    #[serde(default)]
    cited_by_count: u64,
    #[serde(default)]
    authorships: Vec<Authorship>,
    primary_location: Option<Location>,
}

#[derive(Deserialize)]
struct Authorship {
    author: Option<Author>,
}

#[derive(Deserialize)]
struct Author {
    display_name: Option<String>,
}

#[derive(Deserialize)]
struct Location {
    source: Option<Source>,
}

#[derive(Deserialize)]
struct Source {
    display_name: Option<String>,
}

impl RawWork {
    fn into_work(self) -> Option<ExternalWork> {
        let id = self.id.filter(|s| !s.is_empty())?;
        let title = self.display_name.or(self.title).unwrap_or_default();
        Some(ExternalWork {
            id,
            title,
            authors: self
                .authorships
                .into_iter()
                .filter_map(|a| a.author.and_then(|a| a.display_name))
                .collect(),
            year: self.publication_year,
            venue: self
                .primary_location
                .and_then(|l| l.source)
                .and_then(|s| s.display_name),
            doi: self.doi,
            cited_by_count: self.cited_by_count,
        })
    }
}
