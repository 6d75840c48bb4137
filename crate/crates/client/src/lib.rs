//! Thin async client for the exercise service's JSON API.

use std::collections::BTreeMap;

use pex_core::api::{
    ApiError, CatalogEntry, ExerciseInstance, Health, SubmitRequest, UacRequest, Verdict,
};
use reqwest::header::ACCEPT;
use reqwest::StatusCode;
use serde::de::DeserializeOwned;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("request failed: {0}")]
    Http(#[from] reqwest::Error),
    #[error("server answered {status}: {message}")]
    Status { status: StatusCode, message: String },
}

impl ClientError {
    pub fn status(&self) -> Option<StatusCode> {
        match self {
            ClientError::Status { status, .. } => Some(*status),
            ClientError::Http(e) => e.status(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base_url` like `http://127.0.0.1:8080`.
    pub fn new(base_url: impl Into<String>) -> Self {
        Client {
            base: base_url.into().trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    async fn decode<T: DeserializeOwned>(response: reqwest::Response) -> Result<T, ClientError> {
        let status = response.status();
        if status.is_success() {
            return Ok(response.json().await?);
        }
        let text = response.text().await.unwrap_or_default();
        let message = serde_json::from_str::<ApiError>(&text).map_or(text, |e| e.error);
        Err(ClientError::Status { status, message })
    }

    async fn get<T: DeserializeOwned>(&self, path: &str) -> Result<T, ClientError> {
        let response = self
            .http
            .get(format!("{}{path}", self.base))
            .header(ACCEPT, "application/json")
            .send()
            .await?;
        Self::decode(response).await
    }

    pub async fn health(&self) -> Result<Health, ClientError> {
        self.get("/health").await
    }

    pub async fn catalog(&self) -> Result<Vec<CatalogEntry>, ClientError> {
        self.get("/catalog").await
    }

    /// Fetches a fresh instance. User ids are `[a-z0-9]`, so they need no
    /// escaping in the query string.
    pub async fn instance(
        &self,
        exercise_id: &str,
        user_id: &str,
    ) -> Result<ExerciseInstance, ClientError> {
        self.get(&format!("/ex/{exercise_id}?user={user_id}&format=json"))
            .await
    }

    /// Submits answers for an instance, echoing its nonce and tag.
    pub async fn submit(
        &self,
        instance: &ExerciseInstance,
        answers: BTreeMap<String, String>,
    ) -> Result<Verdict, ClientError> {
        let request = SubmitRequest {
            user: instance.user_id.clone(),
            answers,
            nonce: hex::encode(&instance.nonce),
            tag: hex::encode(&instance.integrity_tag),
        };
        self.submit_raw(&instance.exercise_id, &request).await
    }

    pub async fn submit_raw(
        &self,
        exercise_id: &str,
        request: &SubmitRequest,
    ) -> Result<Verdict, ClientError> {
        let response = self
            .http
            .post(format!("{}/ex/{exercise_id}", self.base))
            .json(request)
            .send()
            .await?;
        Self::decode(response).await
    }

    pub async fn submit_uac(&self, user_id: &str, code: &str) -> Result<Verdict, ClientError> {
        let request = UacRequest {
            user: user_id.to_string(),
            code: code.to_string(),
        };
        let response = self
            .http
            .post(format!("{}/uac", self.base))
            .json(&request)
            .send()
            .await?;
        Self::decode(response).await
    }
}
