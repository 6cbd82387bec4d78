//! Blocking HTTP implementation of the addition-service handle.

use std::time::Duration;

use hecloud_core::cloud::{AdditionService, CloudError};
use hecloud_core::wire::{decode_response, encode_request, ProcessRequest, ProcessResponse};

pub struct HttpCloud {
    base: String,
    client: reqwest::blocking::Client,
}

impl HttpCloud {
    pub fn new(endpoint: &str) -> Result<Self, CloudError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(30))
            .build()
            .map_err(|e| CloudError::Transport(e.to_string()))?;
        Ok(Self {
            base: endpoint.trim_end_matches('/').to_string(),
            client,
        })
    }
}

impl AdditionService for HttpCloud {
    fn process(&self, request: &ProcessRequest) -> Result<ProcessResponse, CloudError> {
        let body = encode_request(request)?;
        let context = request.response_context();
        let response = self
            .client
            .post(format!("{}/process", self.base))
            .header("content-type", "application/json")
            .body(body)
            .send()
            .map_err(|e| CloudError::Transport(e.to_string()))?;
        let status = response.status();
        let text = response
            .text()
            .map_err(|e| CloudError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(CloudError::Http {
                status: status.as_u16(),
                body: text,
            });
        }
        Ok(decode_response(&text, &context)?)
    }
}
