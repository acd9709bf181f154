//! Suggestion source backed by an HTTP completion endpoint.

use std::time::Duration;

use needcast_core::needs::SuggestionSource;
use needcast_core::{Error, Result};
use reqwest::blocking::Client;
use reqwest::Url;

/// Issues `GET <base>?<param>=<query>` and accepts either a JSON array of
/// strings or the OpenSearch-style `[query, [suggestion, ...]]`.
pub struct HttpSource {
    client: Client,
    base: Url,
    param: String,
}

impl HttpSource {
    pub fn new(base: &str, param: &str, timeout: Duration) -> Result<Self> {
        let base = Url::parse(base).map_err(|e| Error::Source(format!("bad url `{base}`: {e}")))?;
        let client = Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| Error::Source(e.to_string()))?;
        Ok(HttpSource {
            client,
            base,
            param: param.to_owned(),
        })
    }
}

pub fn parse_suggestion_body(body: &str) -> Result<Vec<String>> {
    let value: serde_json::Value = serde_json::from_str(body)?;
    let list = match &value {
        serde_json::Value::Array(items) if items.iter().all(|v| v.is_string()) => items,
        serde_json::Value::Array(items) => match items.get(1) {
            Some(serde_json::Value::Array(inner)) => inner,
            _ => return Err(Error::Source("unrecognized suggestion payload".into())),
        },
        _ => return Err(Error::Source("suggestion payload is not an array".into())),
    };
    Ok(list.iter().filter_map(|v| v.as_str().map(str::to_owned)).collect())
}

impl SuggestionSource for HttpSource {
    fn suggest(&self, query: &str) -> Result<Vec<String>> {
        let mut url = self.base.clone();
        url.query_pairs_mut().append_pair(&self.param, query);
        let resp = self.client.get(url).send().map_err(|e| Error::Source(e.to_string()))?;
        if !resp.status().is_success() {
            return Err(Error::Source(format!("HTTP {}", resp.status())));
        }
        let body = resp.text().map_err(|e| Error::Source(e.to_string()))?;
        parse_suggestion_body(&body)
    }
}
